use nalgebra::DMatrix;

use crate::linalg::{sym_eigen, to_na, Mat3, Vec3, ZERO_MAT};
use crate::metric::{quadratic_derivative_coefficients, QuadraticField};

const RANK_TOL: f64 = 1e-10;
const PD_MARGIN: f64 = 1e-8;
const COMPASS_PASSES: usize = 20_000;

/// Orthonormal basis of the kernel of `a`, made canonical by row reduction before orthonormalizing.
pub(crate) fn kernel(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = a.ncols();
    // Zero rows keep the matrix tall so the SVD returns all n right singular vectors.
    let mut padded = DMatrix::zeros(a.nrows().max(n), n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let thr = (RANK_TOL * svd.singular_values.max()).max(1e-14);
    let vt = svd.v_t.unwrap();
    let basis = (0..n)
        .filter(|&i| svd.singular_values[i] <= thr)
        .map(|i| (0..n).map(|j| vt[(i, j)]).collect())
        .collect();
    rref_orthonormal(basis, n)
}

fn rref_orthonormal(basis: Vec<Vec<f64>>, n: usize) -> Vec<Vec<f64>> {
    let k = basis.len();
    if k == 0 {
        return basis;
    }
    let mut m = basis;
    let mut row = 0;
    for col in 0..n {
        if row == k {
            break;
        }
        let (piv, val) = (row..k)
            .map(|r| (r, m[r][col].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val < 1e-9 {
            continue;
        }
        m.swap(row, piv);
        let p = m[row][col];
        m[row].iter_mut().for_each(|x| *x /= p);
        for r in 0..k {
            if r != row {
                let fct = m[r][col];
                if fct != 0.0 {
                    for c in 0..n {
                        m[r][c] -= fct * m[row][c];
                    }
                }
            }
        }
        row += 1;
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in m {
        let mut w = v;
        for u in &out {
            let d: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let nn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nn > 1e-12 {
            w.iter_mut().for_each(|x| {
                *x /= nn;
                if x.abs() < 1e-15 {
                    *x = 0.0;
                }
            });
            out.push(w);
        }
    }
    out
}

/// Covectors `ℓ` with `ℓ(F(v)) ≡ 0`.
pub fn linear_first_integrals(f: &QuadraticField) -> Vec<Vec3> {
    let c = f.coefficients();
    let a = DMatrix::from_fn(6, 3, |n, i| c[i][n]);
    kernel(&a).into_iter().map(|v| [v[0], v[1], v[2]]).collect()
}

const SYM_SLOTS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

pub fn sym_from_params(p: &[f64]) -> Mat3 {
    let mut s = ZERO_MAT;
    for (n, &(i, j)) in SYM_SLOTS.iter().enumerate() {
        s[i][j] = p[n];
        s[j][i] = p[n];
    }
    s
}

/// Symmetric `S` with `∇(vᵀSv)·F ≡ 0`.
pub fn quadratic_first_integrals(f: &QuadraticField) -> Vec<Mat3> {
    let mut a = DMatrix::zeros(10, 6);
    for n in 0..6 {
        let mut p = [0.0; 6];
        p[n] = 1.0;
        let col = quadratic_derivative_coefficients(&sym_from_params(&p), f);
        for (r, v) in col.iter().enumerate() {
            a[(r, n)] = *v;
        }
    }
    kernel(&a).into_iter().map(|v| sym_from_params(&v)).collect()
}

fn combine(basis: &[Mat3], c: &[f64]) -> Mat3 {
    let mut s = ZERO_MAT;
    for (b, &w) in basis.iter().zip(c) {
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += w * b[i][j];
            }
        }
    }
    s
}

fn unit(c: &[f64]) -> Vec<f64> {
    let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    c.iter().map(|x| x / n).collect()
}

fn min_eig(basis: &[Mat3], c: &[f64]) -> f64 {
    sym_eigen(&combine(basis, c)).0[0]
}

/// Compass search for the largest smallest eigenvalue on the unit sphere of coefficients.
fn compass(basis: &[Mat3], start: Vec<f64>) -> (Vec<f64>, f64) {
    let k = basis.len();
    let mut c = start;
    let mut best = min_eig(basis, &c);
    let mut step = 0.5;
    let mut passes = 0;
    while step > 1e-10 && passes < COMPASS_PASSES {
        passes += 1;
        let mut improved = false;
        for j in 0..k {
            for sgn in [1.0, -1.0] {
                let mut t = c.clone();
                t[j] += sgn * step;
                let t = unit(&t);
                let v = min_eig(basis, &t);
                // gains at round-off level would otherwise keep the step from shrinking
                if v > best + 1e-14 * (1.0 + best.abs()) {
                    best = v;
                    c = t;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (c, best)
}

/// Cholesky check of positive-definiteness.
pub fn is_positive_definite(s: &Mat3) -> bool {
    to_na(s).cholesky().is_some()
}

/// A positive-definite quadratic first integral, when the integral space contains one.
pub fn positive_definite_integral(f: &QuadraticField) -> Option<Mat3> {
    positive_definite_in_span(&quadratic_first_integrals(f))
}

/// A positive-definite element of `span(basis)`, normalized to largest eigenvalue 1.
pub fn positive_definite_in_span(basis: &[Mat3]) -> Option<Mat3> {
    let k = basis.len();
    if k == 0 {
        return None;
    }
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let total = 3usize.pow(k as u32);
    for code in 0..total {
        let mut x = code;
        let c: Vec<f64> = (0..k)
            .map(|_| {
                let d = (x % 3) as f64 - 1.0;
                x /= 3;
                d
            })
            .collect();
        if c.iter().any(|&v| v != 0.0) {
            starts.push(unit(&c));
        }
    }
    let mut scored: Vec<(f64, Vec<f64>)> = starts.into_iter().map(|c| (min_eig(basis, &c), c)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (c, _) = scored
        .into_iter()
        .take(8)
        .map(|(_, c)| compass(basis, c))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let s = combine(basis, &c);
    let (ev, _) = sym_eigen(&s);
    if ev[0] >= PD_MARGIN * ev[2] && ev[2] > 0.0 && is_positive_definite(&s) {
        Some(s.map(|row| row.map(|x| x / ev[2])))
    } else {
        None
    }
}

/// Whether `s` lies in `span(basis)` up to relative tolerance `tol`.
pub fn in_span(basis: &[Mat3], s: &Mat3, tol: f64) -> bool {
    let flat = |m: &Mat3| [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]];
    let a = DMatrix::from_fn(6, basis.len(), |r, c| flat(&basis[c])[r]);
    let b = DMatrix::from_column_slice(6, 1, &flat(s));
    let svd = a.clone().svd(true, true);
    let Ok(x) = svd.solve(&b, 1e-12) else { return false };
    let r = &a * x - &b;
    r.norm() <= tol * b.norm().max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{standard_family, FamilyId};
    use crate::linalg::dot;
    use crate::metric::euler_arnold_field;
    use crate::normal_form::{normal_form_form, normal_form_matrix, NormalFormTag};
    use NormalFormTag::*;

    fn field(lambda: f64, tag: NormalFormTag, p: Option<f64>) -> QuadraticField {
        let g = standard_family(FamilyId::H(lambda)).unwrap();
        euler_arnold_field(&g, &normal_form_form(tag, p).unwrap()).unwrap()
    }

    fn parallel(a: &Vec3, b: &Vec3) -> bool {
        let na = dot(a, a).sqrt();
        let nb = dot(b, b).sqrt();
        (dot(a, b).abs() - na * nb).abs() < 1e-10 * na * nb
    }

    #[test]
    fn linear_examples() {
        let l = linear_first_integrals(&field(0.0, Q1, None));
        assert_eq!(l.len(), 1);
        assert!(parallel(&l[0], &[0.0, 0.0, 1.0]));
        let l = linear_first_integrals(&field(0.0, Q5, Some(-0.5)));
        assert_eq!(l.len(), 1);
        assert!(parallel(&l[0], &[0.0, 1.0, -0.5]));
        assert!(linear_first_integrals(&field(0.5, Q2, None)).is_empty());
        let l = linear_first_integrals(&field(0.0, Q8, None));
        assert_eq!(l.len(), 1);
        assert!(parallel(&l[0], &[0.0, 1.0, -1.0]));
    }

    #[test]
    fn killing_covector_is_a_linear_integral_at_zero() {
        // q(e3, ·) is conserved for every metric on h(0).
        for tag in NormalFormTag::LORENTZIAN {
            let p = match tag {
                Q4 => Some(-0.7),
                Q5 => Some(0.3),
                Q6 => Some(3.0),
                _ => None,
            };
            let m = normal_form_matrix(tag, p).unwrap();
            let ell = m[2];
            let c = field(0.0, tag, p).coefficients();
            for n in 0..6 {
                let v: f64 = (0..3).map(|i| ell[i] * c[i][n]).sum();
                assert!(v.abs() < 1e-12, "{tag}");
            }
        }
    }

    #[test]
    fn quadratic_examples() {
        let q = quadratic_first_integrals(&field(0.0, Q1, None));
        assert_eq!(q.len(), 2);
        let i1 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(in_span(&q, &i1, 1e-10));
        assert!(in_span(&q, &normal_form_matrix(Q1, None).unwrap(), 1e-10));
        let s = -0.5;
        let q = quadratic_first_integrals(&field(-1.0, Q5, Some(s)));
        let fint = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.5 * (s - 1.0)], [0.0, 0.5 * (s - 1.0), -s]];
        assert!(in_span(&q, &fint, 1e-10));
        let q = quadratic_first_integrals(&field(0.5, Q2, None));
        assert_eq!(q.len(), 1);
        assert!(in_span(&q, &normal_form_matrix(Q2, None).unwrap(), 1e-10));
    }

    #[test]
    fn energy_always_in_the_integral_space() {
        for lambda in [-1.0, -0.5, 0.0, 1.0 / 3.0, 1.0] {
            for tag in NormalFormTag::LORENTZIAN {
                let p = match tag {
                    Q4 => Some(0.4),
                    Q5 => Some(-0.2),
                    Q6 => Some(1.5),
                    _ => None,
                };
                let q = quadratic_first_integrals(&field(lambda, tag, p));
                assert!(in_span(&q, &normal_form_matrix(tag, p).unwrap(), 1e-9), "{tag} {lambda}");
                for s in &q {
                    let c = quadratic_derivative_coefficients(s, &field(lambda, tag, p));
                    assert!(c.iter().all(|x| x.abs() <= 1e-12));
                }
            }
        }
    }

    #[test]
    fn positive_definite_examples() {
        let q = quadratic_first_integrals(&field(0.0, Q8, None));
        let s = positive_definite_integral(&field(0.0, Q8, None)).unwrap();
        assert!(is_positive_definite(&s) && in_span(&q, &s, 1e-9));
        let i8 = [[1.0, 0.0, 0.0], [0.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
        assert!(in_span(&q, &i8, 1e-10));

        let s = -0.5;
        let f = field(-1.0, Q5, Some(s));
        let pd = positive_definite_integral(&f).unwrap();
        assert!(in_span(&quadratic_first_integrals(&f), &pd, 1e-9));
        let witness = [[1.0, 0.0, 0.0], [0.0, 1.0, s], [0.0, s, -s]];
        assert!(is_positive_definite(&witness));
        assert!(in_span(&quadratic_first_integrals(&f), &witness, 1e-10));

        assert!(positive_definite_integral(&field(0.5, Q2, None)).is_none());
    }

    #[test]
    fn nothing_positive_definite_in_incomplete_cases() {
        for (lambda, tag, p) in [(0.0, Q2, None), (0.5, Q9, None), (0.25, Q5, Some(0.0)), (0.0, Q4, Some(0.0))] {
            assert!(positive_definite_integral(&field(lambda, tag, p)).is_none(), "{tag}");
        }
    }
}
