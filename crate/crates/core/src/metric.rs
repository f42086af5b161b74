//! Symmetric bilinear forms and the Euler–Arnold geodesic field `v̇ = ad†_v v`.

use std::fmt;

use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebra3;
use crate::error::{Error, Result};
use crate::linalg::{
    dot, frobenius, inverse, inverse_exact, mat_mul, mat_vec, norm, q_to_f64, qmat_from_f64, qmat_to_f64, sym_eigen,
    transpose, Mat3, QMat3, Tensor3, Vec3,
};

/// Relative zero threshold for eigenvalues and causal characters.
pub const ZERO_TOL: f64 = 1e-10;

/// Monomial order used for every coefficient vector: x², xy, xz, y², yz, z².
pub const MONOMIALS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
const VAR: [&str; 3] = ["x", "y", "z"];

pub fn monomial_index(j: usize, k: usize) -> usize {
    let (j, k) = if j <= k { (j, k) } else { (k, j) };
    MONOMIALS.iter().position(|&p| p == (j, k)).unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    m: Mat3,
    exact: QMat3,
    signature: (usize, usize, usize),
}

pub fn signature_of(m: &Mat3) -> (usize, usize, usize) {
    let (vals, _) = sym_eigen(m);
    let tol = ZERO_TOL * frobenius(m);
    let pos = vals.iter().filter(|&&x| x > tol).count();
    let neg = vals.iter().filter(|&&x| x < -tol).count();
    (pos, neg, 3 - pos - neg)
}

impl BilinearForm {
    pub fn new(m: Mat3) -> Result<Self> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parse("bilinear form has non-finite entries".into()));
        }
        if !crate::linalg::is_symmetric(&m) {
            return Err(Error::NotSymmetric);
        }
        Ok(BilinearForm {
            exact: qmat_from_f64(&m),
            signature: signature_of(&m),
            m,
        })
    }

    /// Builds the form from exact entries; the float matrix is their rounding.
    pub fn from_exact(q: QMat3) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                if q[i][j] != q[j][i] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let m = qmat_to_f64(&q);
        Ok(BilinearForm {
            signature: signature_of(&m),
            exact: q,
            m,
        })
    }

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[i][i] = d[i];
        }
        Self::new(m).expect("diagonal forms are symmetric")
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn exact(&self) -> &QMat3 {
        &self.exact
    }

    pub fn signature(&self) -> (usize, usize, usize) {
        self.signature
    }

    pub fn is_degenerate(&self) -> bool {
        self.signature.2 > 0
    }

    pub fn is_lorentzian(&self) -> bool {
        matches!(self.signature, (2, 1, 0) | (1, 2, 0))
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.m)
    }

    pub fn eval(&self, u: &Vec3, v: &Vec3) -> f64 {
        dot(u, &mat_vec(&self.m, v))
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(crate::linalg::mat_scale(&self.m, s))
    }
}

pub fn signature(q: &BilinearForm) -> (usize, usize, usize) {
    q.signature()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Lightlike,
}

pub fn causal_character(q: &BilinearForm, v: &Vec3) -> Result<CausalCharacter> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let val = q.eval(v, v);
    let tau = ZERO_TOL * q.norm() * n * n;
    Ok(if val > tau {
        CausalCharacter::Spacelike
    } else if val < -tau {
        CausalCharacter::Timelike
    } else {
        CausalCharacter::Lightlike
    })
}

/// `m⁻¹ · ad_vᵀ · m`.
pub fn ad_dagger(g: &LieAlgebra3, q: &BilinearForm, v: &Vec3) -> Result<Mat3> {
    if q.is_degenerate() {
        return Err(Error::DegenerateForm);
    }
    let minv = inverse(q.matrix()).ok_or(Error::DegenerateForm)?;
    Ok(mat_mul(&minv, &mat_mul(&transpose(&g.ad_matrix(v)), q.matrix())))
}

pub fn energy(q: &BilinearForm, v: &Vec3) -> f64 {
    q.eval(v, v)
}

/// Homogeneous quadratic field `F_i(v) = Σ_{j,k} B[i][j][k] v_j v_k` with `B` symmetric in `(j,k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticField {
    b: Tensor3,
}

impl QuadraticField {
    /// Symmetrizes `b` in its last two indices.
    pub fn from_tensor(b: Tensor3) -> Self {
        let mut s = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    s[i][j][k] = 0.5 * (b[i][j][k] + b[i][k][j]);
                }
            }
        }
        QuadraticField { b: s }
    }

    /// From monomial coefficients per component, in [`MONOMIALS`] order.
    pub fn from_coefficients(c: &[[f64; 6]; 3]) -> Self {
        let mut b = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for (n, &(j, k)) in MONOMIALS.iter().enumerate() {
                if j == k {
                    b[i][j][j] = c[i][n];
                } else {
                    b[i][j][k] = 0.5 * c[i][n];
                    b[i][k][j] = 0.5 * c[i][n];
                }
            }
        }
        QuadraticField { b }
    }

    pub fn zero() -> Self {
        QuadraticField { b: [[[0.0; 3]; 3]; 3] }
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.b
    }

    pub fn coefficients(&self) -> [[f64; 6]; 3] {
        let mut c = [[0.0; 6]; 3];
        for i in 0..3 {
            for (n, &(j, k)) in MONOMIALS.iter().enumerate() {
                c[i][n] = if j == k { self.b[i][j][j] } else { self.b[i][j][k] + self.b[i][k][j] };
            }
        }
        c
    }

    /// Symmetric bilinear map `B(u, w)` with `B(v, v) = F(v)`.
    pub fn bilinear(&self, u: &Vec3, w: &Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for (i, bi) in self.b.iter().enumerate() {
            out[i] = (0..3).map(|j| u[j] * dot(&bi[j], w)).sum();
        }
        out
    }

    pub fn eval(&self, v: &Vec3) -> Vec3 {
        self.bilinear(v, v)
    }

    /// `DF(v)[i][j] = 2 Σ_k B[i][j][k] v_k`.
    pub fn jacobian(&self, v: &Vec3) -> Mat3 {
        let mut j = [[0.0; 3]; 3];
        for i in 0..3 {
            for a in 0..3 {
                j[i][a] = 2.0 * dot(&self.b[i][a], v);
            }
        }
        j
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut b = self.b;
        b.iter_mut().flatten().flatten().for_each(|x| *x *= s);
        QuadraticField { b }
    }

    /// `G(w) = L · F(L⁻¹ w)`, given `L` and its inverse.
    pub fn conjugate(&self, l: &Mat3, linv: &Mat3) -> Self {
        let mut g = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut s = 0.0;
                    for a in 0..3 {
                        if l[i][a] == 0.0 {
                            continue;
                        }
                        for p in 0..3 {
                            for r in 0..3 {
                                s += l[i][a] * self.b[a][p][r] * linv[p][j] * linv[r][k];
                            }
                        }
                    }
                    g[i][j][k] = s;
                }
            }
        }
        QuadraticField::from_tensor(g)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.b.iter().flatten().flatten().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    /// Component polynomials as text, e.g. `-y^2 + 0.5*z^2`.
    pub fn polynomials(&self) -> [String; 3] {
        let c = self.coefficients();
        std::array::from_fn(|i| {
            let terms: Vec<(String, usize)> = (0..6)
                .filter(|&n| c[i][n] != 0.0)
                .map(|n| (format!("{}", c[i][n]), n))
                .collect();
            join_terms(&terms)
        })
    }
}

fn monomial_name(n: usize) -> String {
    let (j, k) = MONOMIALS[n];
    if j == k {
        format!("{}^2", VAR[j])
    } else {
        format!("{}*{}", VAR[j], VAR[k])
    }
}

/// Joins `(coefficient text, monomial index)` pairs into a polynomial string.
fn join_terms(terms: &[(String, usize)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, (coef, n)) in terms.iter().enumerate() {
        let (neg, mag) = match coef.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, coef.as_str()),
        };
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mag != "1" {
            out.push_str(mag);
            out.push('*');
        }
        out.push_str(&monomial_name(*n));
    }
    out
}

/// The Euler–Arnold field with exact rational coefficients, in [`MONOMIALS`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactQuadraticField {
    pub coeffs: [[BigRational; 6]; 3],
}

impl ExactQuadraticField {
    /// Builds a field from per-component coefficients in [`MONOMIALS`] order.
    pub fn new(coeffs: [[BigRational; 6]; 3]) -> Self {
        ExactQuadraticField { coeffs }
    }

    pub fn to_float(&self) -> QuadraticField {
        let mut c = [[0.0; 6]; 3];
        for i in 0..3 {
            for n in 0..6 {
                c[i][n] = q_to_f64(&self.coeffs[i][n]);
            }
        }
        QuadraticField::from_coefficients(&c)
    }

    pub fn polynomials(&self) -> [String; 3] {
        std::array::from_fn(|i| {
            let terms: Vec<(String, usize)> = (0..6)
                .filter(|&n| !self.coeffs[i][n].is_zero())
                .map(|n| (self.coeffs[i][n].to_string(), n))
                .collect();
            join_terms(&terms)
        })
    }
}

impl fmt::Display for ExactQuadraticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.polynomials();
        write!(f, "x' = {}\ny' = {}\nz' = {}", p[0], p[1], p[2])
    }
}

fn field_tensor_unsymmetrized(c: &Tensor3, m: &Mat3, minv: &Mat3) -> Tensor3 {
    let mut b = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for a in 0..3 {
                    for bb in 0..3 {
                        s += minv[i][a] * c[bb][j][a] * m[bb][k];
                    }
                }
                b[i][j][k] = s;
            }
        }
    }
    b
}

/// `F(v) = ad†_v v = m⁻¹ ad_vᵀ m v`.
pub fn euler_arnold_field(g: &LieAlgebra3, q: &BilinearForm) -> Result<QuadraticField> {
    if q.is_degenerate() {
        return Err(Error::DegenerateForm);
    }
    let minv = inverse(q.matrix()).ok_or(Error::DegenerateForm)?;
    Ok(QuadraticField::from_tensor(field_tensor_unsymmetrized(
        g.structure_constants(),
        q.matrix(),
        &minv,
    )))
}

/// Same field computed in exact arithmetic from the rational shadows of `g` and `q`.
pub fn euler_arnold_field_exact(g: &LieAlgebra3, q: &BilinearForm) -> Result<ExactQuadraticField> {
    let m = q.exact();
    let minv = inverse_exact(m).ok_or(Error::DegenerateForm)?;
    let c = g.exact_constants();
    let mut coeffs: [[BigRational; 6]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| BigRational::zero()));
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut s = BigRational::zero();
                for a in 0..3 {
                    if minv[i][a].is_zero() {
                        continue;
                    }
                    for bb in 0..3 {
                        if c[bb][j][a].is_zero() || m[bb][k].is_zero() {
                            continue;
                        }
                        s += &minv[i][a] * &c[bb][j][a] * &m[bb][k];
                    }
                }
                coeffs[i][monomial_index(j, k)] += s;
            }
        }
    }
    Ok(ExactQuadraticField { coeffs })
}

/// Cubic coefficients of `∇(vᵀ S v) · F(v)`, indexed by exponent triples in lexicographic order.
pub fn quadratic_derivative_coefficients(s: &Mat3, f: &QuadraticField) -> [f64; 10] {
    // ∇(vᵀSv)·F = 2 Σ_{i,l} S[i][l] v_l F_i(v) = 2 Σ_{i,l,j,k} S[i][l] B[i][j][k] v_l v_j v_k
    let b = f.tensor();
    let mut out = [0.0; 10];
    for i in 0..3 {
        for l in 0..3 {
            if s[i][l] == 0.0 {
                continue;
            }
            for j in 0..3 {
                for k in 0..3 {
                    out[cubic_index(l, j, k)] += 2.0 * s[i][l] * b[i][j][k];
                }
            }
        }
    }
    out
}

/// Index of the cubic monomial `v_a v_b v_c` among the 10 cubic monomials.
pub fn cubic_index(a: usize, b: usize, c: usize) -> usize {
    let mut e = [0usize; 3];
    e[a] += 1;
    e[b] += 1;
    e[c] += 1;
    CUBIC_EXPONENTS.iter().position(|&x| x == e).unwrap()
}

pub const CUBIC_EXPONENTS: [[usize; 3]; 10] = [
    [3, 0, 0],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [1, 1, 1],
    [1, 0, 2],
    [0, 3, 0],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

/// Exact version of `∇(vᵀ S v) · F` for exact fields.
pub fn exact_energy_identity(s: &QMat3, f: &ExactQuadraticField) -> [BigRational; 10] {
    let two = BigRational::one() + BigRational::one();
    let mut out: [BigRational; 10] = std::array::from_fn(|_| BigRational::zero());
    for i in 0..3 {
        for l in 0..3 {
            if s[i][l].is_zero() {
                continue;
            }
            for (n, &(j, k)) in MONOMIALS.iter().enumerate() {
                let c = &f.coeffs[i][n];
                if c.is_zero() {
                    continue;
                }
                out[cubic_index(l, j, k)] += &two * &s[i][l] * c;
            }
        }
    }
    out
}

/// Largest absolute value in a slice of rationals.
pub fn max_abs_rational(v: &[BigRational]) -> BigRational {
    v.iter().map(|x| x.abs()).fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}
