use serde::{Deserialize, Serialize};

use crate::linalg::{max_abs, sym_eigen2, Mat3};
use crate::metric::{BilinearForm, QuadraticField, MONOMIALS};

/// `s·F_i(v) − c·e(v) = a·v_i² + (v_j, v_k) β (v_j, v_k)ᵀ` with `a > 0` and `β ⪰ 0`,
/// where `(j, k)` are the other two indices in increasing order.
///
/// On the null cone this gives `d(s·v_i)/dt ≥ a·v_i²`, so every null initial
/// condition with `s·v_i > 0` blows up no later than `1 / (a·s·v_i(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationCertificate {
    pub variable: usize,
    pub sign: f64,
    pub shift: f64,
    pub a: f64,
    pub beta: [[f64; 2]; 2],
    /// Largest coefficient mismatch of the polynomial identity.
    pub residual: f64,
}

impl DominationCertificate {
    pub fn others(&self) -> (usize, usize) {
        others(self.variable)
    }

    /// Recomputes the identity residual and the sign conditions against `f` and `q`.
    pub fn verify(&self, f: &QuadraticField, q: &BilinearForm) -> Option<f64> {
        let scale = f.max_coefficient().max(max_abs(q.matrix())).max(1.0);
        let r = identity_residual(f, q, self);
        let (ev, _) = sym_eigen2(self.beta[0][0], self.beta[0][1], self.beta[1][1]);
        (r <= 1e-12 * scale && self.a > 0.0 && ev[0] >= -1e-12 * scale).then_some(r)
    }

    /// Blow-up time bound for a null initial condition with `s·v_i(0) > 0`.
    pub fn blowup_bound(&self, v0: &[f64; 3]) -> Option<f64> {
        let x = self.sign * v0[self.variable];
        (x > 0.0).then(|| 1.0 / (self.a * x))
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn identity_residual(f: &QuadraticField, q: &BilinearForm, c: &DominationCertificate) -> f64 {
    let b = &f.tensor()[c.variable];
    let e = q.matrix();
    let (j, k) = c.others();
    let mut rhs = [[0.0; 3]; 3];
    rhs[c.variable][c.variable] = c.a;
    rhs[j][j] = c.beta[0][0];
    rhs[j][k] = c.beta[0][1];
    rhs[k][j] = c.beta[1][0];
    rhs[k][k] = c.beta[1][1];
    MONOMIALS
        .iter()
        .map(|&(p, r)| {
            let lhs = c.sign * b[p][r] - c.shift * e[p][r];
            (lhs - rhs[p][r]).abs()
        })
        .fold(0.0, f64::max)
}

/// Real roots of `a c² + b c + k`, with the vertex added for a (near-)double root.
fn quadratic_roots(a: f64, b: f64, k: f64, scale: f64) -> Vec<f64> {
    let tiny = 1e-14 * scale;
    if a.abs() <= tiny {
        return if b.abs() > tiny { vec![-k / b] } else { Vec::new() };
    }
    let mut out = vec![-b / (2.0 * a)];
    let disc = b * b - 4.0 * a * k;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let qq = -0.5 * (b + b.signum() * sq);
        if qq != 0.0 {
            out.push(qq / a);
            out.push(k / qq);
        }
    }
    out
}

fn try_variable(f: &QuadraticField, q: &BilinearForm, i: usize, sign: f64) -> Option<DominationCertificate> {
    let p: Mat3 = f.tensor()[i].map(|row| row.map(|x| sign * x));
    let e = q.matrix();
    let (j, k) = others(i);
    let scale = max_abs(&p).max(max_abs(e)).max(1.0);
    let tol = 1e-12 * scale;

    let forced: Vec<f64> = [j, k]
        .iter()
        .filter(|&&m| e[i][m].abs() > tol)
        .map(|&m| p[i][m] / e[i][m])
        .collect();
    let candidates: Vec<f64> = if let Some(&c) = forced.first() {
        vec![c]
    } else {
        if p[i][j].abs() > tol || p[i][k].abs() > tol {
            return None;
        }
        let mut cands = vec![0.0];
        let lin = |pp: f64, ee: f64| if ee.abs() > tol { Some(pp / ee) } else { None };
        cands.extend(lin(p[j][j], e[j][j]));
        cands.extend(lin(p[k][k], e[k][k]));
        cands.extend(lin(p[i][i] - 1.0, e[i][i]));
        // det β(c) = (pjj − c ejj)(pkk − c ekk) − (pjk − c ejk)²
        let qa = e[j][j] * e[k][k] - e[j][k] * e[j][k];
        let qb = -(p[j][j] * e[k][k] + p[k][k] * e[j][j]) + 2.0 * p[j][k] * e[j][k];
        let qc = p[j][j] * p[k][k] - p[j][k] * p[j][k];
        cands.extend(quadratic_roots(qa, qb, qc, scale * scale));
        cands
    };

    let mut best: Option<DominationCertificate> = None;
    for c in candidates {
        if !c.is_finite() {
            continue;
        }
        let cross_ok = [j, k].iter().all(|&m| (p[i][m] - c * e[i][m]).abs() <= 1e-10 * scale);
        if !cross_ok {
            continue;
        }
        let a = p[i][i] - c * e[i][i];
        let clean = |x: f64| if x.abs() <= tol { 0.0 } else { x };
        let beta = [
            [clean(p[j][j] - c * e[j][j]), clean(p[j][k] - c * e[j][k])],
            [clean(p[j][k] - c * e[j][k]), clean(p[k][k] - c * e[k][k])],
        ];
        let (ev, _) = sym_eigen2(beta[0][0], beta[0][1], beta[1][1]);
        if a <= tol || ev[0] < -tol {
            continue;
        }
        let mut cert = DominationCertificate {
            variable: i,
            sign,
            shift: c,
            a,
            beta,
            residual: 0.0,
        };
        cert.residual = identity_residual(f, q, &cert);
        let better = match &best {
            None => true,
            Some(b) => a > b.a + tol || ((a - b.a).abs() <= tol && c.abs() < b.shift.abs()),
        };
        if better {
            best = Some(cert);
        }
    }
    best
}

/// Searches `(x,+), (x,−), (y,+), (y,−), (z,+), (z,−)` and returns the first certificate found.
pub fn null_cone_domination(f: &QuadraticField, q: &BilinearForm) -> Option<DominationCertificate> {
    if !q.is_lorentzian() {
        return None;
    }
    for i in 0..3 {
        for sign in [1.0, -1.0] {
            if let Some(c) = try_variable(f, q, i, sign) {
                return Some(c);
            }
        }
    }
    None
}

/// A null vector of `q` whose coordinate `i` equals `value`.
pub fn null_vector_with(q: &BilinearForm, i: usize, value: f64) -> Option<[f64; 3]> {
    let m = q.matrix();
    let (j, k) = others(i);
    // Fix v_i = value, v_k = t, solve the quadratic in v_j; scan t for a real root.
    for t in [0.0, 1.0, -1.0, 0.5, -0.5, 2.0, -2.0, 0.25, 3.0] {
        let mut v = [0.0; 3];
        v[i] = value;
        v[k] = t * value.abs().max(1.0);
        let a = m[j][j];
        let b = 2.0 * (m[j][i] * v[i] + m[j][k] * v[k]);
        let c = m[i][i] * v[i] * v[i] + 2.0 * m[i][k] * v[i] * v[k] + m[k][k] * v[k] * v[k];
        let roots = quadratic_roots(a, b, c, 1.0);
        for r in roots {
            v[j] = r;
            let e = q.eval(&v, &v);
            let size = v.iter().map(|x| x * x).sum::<f64>();
            if r.is_finite() && e.abs() <= 1e-12 * size.max(1.0) * max_abs(m).max(1.0) {
                return Some(v);
            }
        }
    }
    None
}
