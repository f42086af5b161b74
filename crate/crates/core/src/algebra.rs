//! Three-dimensional real Lie algebras given by structure constants.
//!
//! The tensor is indexed `c[k][i][j]` and encodes `[e_i, e_j] = Σ_k c[k][i][j] e_k`.
//! Alongside the floating-point tensor every algebra keeps an exact rational
//! copy, which is the binary value of the floats unless the algebra was built
//! from rational parameters directly.

use num::{BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{q_from_f64, q_to_f64, Mat3, QTensor3, Tensor3, Vec3, ZERO_MAT};

/// Relative tolerance on the Jacobi residual, scaled by `(1 + max|c|)²`.
pub const JACOBI_TOL: f64 = 1e-12;
const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyId {
    /// `[e1,e2] = e2`, `[e1,e3] = λ e3`, `|λ| ≤ 1`.
    H(f64),
    /// `[e1,e2] = e2`, `[e1,e3] = e2 + e3`.
    Psh,
    /// `[e1,e2] = μ e2 + e3`, `[e1,e3] = μ e3 − e2`, `μ > 0`.
    E(f64),
    Custom,
}

impl FamilyId {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            FamilyId::H(l) => Some(*l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra3 {
    c: Tensor3,
    exact: QTensor3,
    family: FamilyId,
}

fn zero_qtensor() -> QTensor3 {
    std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| BigRational::zero())))
}

fn tensor_to_f64(c: &QTensor3) -> Tensor3 {
    let mut out = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                out[k][i][j] = q_to_f64(&c[k][i][j]);
            }
        }
    }
    out
}

/// Writes `[e_i, e_j] = Σ_k coeffs[k] e_k` together with its mirror `[e_j, e_i]`.
fn set_bracket(c: &mut QTensor3, i: usize, j: usize, coeffs: [BigRational; 3]) {
    for (k, v) in coeffs.into_iter().enumerate() {
        c[k][j][i] = -v.clone();
        c[k][i][j] = v;
    }
}

/// Bracket of two vectors using the floating-point constants.
pub fn bracket_with(c: &Tensor3, u: &Vec3, v: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (k, ck) in c.iter().enumerate() {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += ck[i][j] * u[i] * v[j];
            }
        }
        out[k] = s;
    }
    out
}

/// Largest component of the Jacobiator over all basis triples, with the triple attaining it.
pub fn jacobi_residual(c: &Tensor3) -> ([usize; 3], f64) {
    let e = |i: usize| {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        v
    };
    let mut worst = ([0, 0, 0], 0.0_f64);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let a = bracket_with(c, &e(i), &bracket_with(c, &e(j), &e(k)));
                let b = bracket_with(c, &e(j), &bracket_with(c, &e(k), &e(i)));
                let d = bracket_with(c, &e(k), &bracket_with(c, &e(i), &e(j)));
                let r = (0..3).map(|n| (a[n] + b[n] + d[n]).abs()).fold(0.0, f64::max);
                if r > worst.1 {
                    worst = ([i, j, k], r);
                }
            }
        }
    }
    worst
}

fn validate(c: &Tensor3) -> Result<()> {
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                if c[k][i][j] != -c[k][j][i] || !c[k][i][j].is_finite() {
                    return Err(Error::NotAntisymmetric {
                        k,
                        i,
                        j,
                        value: c[k][i][j],
                        mirror: c[k][j][i],
                    });
                }
            }
        }
    }
    let max_c = c.iter().flatten().flatten().fold(0.0_f64, |a, x| a.max(x.abs()));
    let (triple, residual) = jacobi_residual(c);
    if residual > JACOBI_TOL * (1.0 + max_c).powi(2) {
        return Err(Error::JacobiViolation { triple, residual });
    }
    Ok(())
}

/// Validates a structure-constant tensor and wraps it as a custom algebra.
pub fn make_lie_algebra(c: Tensor3) -> Result<LieAlgebra3> {
    validate(&c)?;
    let mut exact = zero_qtensor();
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                exact[k][i][j] = q_from_f64(c[k][i][j]);
            }
        }
    }
    Ok(LieAlgebra3 {
        c,
        exact,
        family: FamilyId::Custom,
    })
}

/// The standard families with their defining brackets.
pub fn standard_family(id: FamilyId) -> Result<LieAlgebra3> {
    match id {
        FamilyId::H(l) => {
            if !(l.is_finite() && l.abs() <= 1.0) {
                return Err(Error::ParameterOutOfRange(format!("h(lambda) needs |lambda| <= 1, got {l}")));
            }
            Ok(h_exact(&q_from_f64(l))?.with_family(id))
        }
        FamilyId::Psh => {
            let one = BigRational::from_integer(1.into());
            let mut c = zero_qtensor();
            set_bracket(&mut c, 0, 1, [BigRational::zero(), one.clone(), BigRational::zero()]);
            set_bracket(&mut c, 0, 2, [BigRational::zero(), one.clone(), one]);
            LieAlgebra3::from_exact(c, id)
        }
        FamilyId::E(mu) => {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::ParameterOutOfRange(format!("e(mu) needs mu > 0, got {mu}")));
            }
            let mu = q_from_f64(mu);
            let one = BigRational::from_integer(1.into());
            let mut c = zero_qtensor();
            set_bracket(&mut c, 0, 1, [BigRational::zero(), mu.clone(), one.clone()]);
            set_bracket(&mut c, 0, 2, [BigRational::zero(), -one, mu]);
            LieAlgebra3::from_exact(c, id)
        }
        FamilyId::Custom => Err(Error::ParameterOutOfRange(
            "custom algebras are built from a tensor, not a family id".into(),
        )),
    }
}

/// `h(λ)` with an exactly rational parameter, e.g. λ = 1/3.
pub fn h_exact(lambda: &BigRational) -> Result<LieAlgebra3> {
    let one = BigRational::from_integer(1.into());
    if lambda.abs() > one {
        return Err(Error::ParameterOutOfRange(format!("h(lambda) needs |lambda| <= 1, got {lambda}")));
    }
    let mut c = zero_qtensor();
    set_bracket(&mut c, 0, 1, [BigRational::zero(), one, BigRational::zero()]);
    set_bracket(&mut c, 0, 2, [BigRational::zero(), BigRational::zero(), lambda.clone()]);
    LieAlgebra3::from_exact(c, FamilyId::H(q_to_f64(lambda)))
}

impl LieAlgebra3 {
    fn from_exact(exact: QTensor3, family: FamilyId) -> Result<Self> {
        let c = tensor_to_f64(&exact);
        validate(&c)?;
        Ok(LieAlgebra3 { c, exact, family })
    }

    fn with_family(mut self, family: FamilyId) -> Self {
        self.family = family;
        self
    }

    pub fn structure_constants(&self) -> &Tensor3 {
        &self.c
    }

    pub fn exact_constants(&self) -> &QTensor3 {
        &self.exact
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn bracket(&self, u: &Vec3, v: &Vec3) -> Vec3 {
        bracket_with(&self.c, u, v)
    }

    /// `(ad_v)[k][j] = Σ_i v_i c[k][i][j]`, so that `ad_v · w = [v, w]`.
    pub fn ad_matrix(&self, v: &Vec3) -> Mat3 {
        let mut ad = ZERO_MAT;
        for k in 0..3 {
            for j in 0..3 {
                ad[k][j] = (0..3).map(|i| v[i] * self.c[k][i][j]).sum();
            }
        }
        ad
    }

    pub fn is_unimodular(&self) -> bool {
        (0..3).all(|i| (0..3).map(|k| self.c[k][i][k]).sum::<f64>().abs() <= UNIMODULAR_TOL)
    }

    /// Residual of `φ[x, y] − [φx, φy]` over basis pairs, `φ` acting on column vectors.
    pub fn automorphism_residual(&self, phi: &Mat3) -> f64 {
        let col = |j: usize| [phi[0][j], phi[1][j], phi[2][j]];
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut e_i = [0.0; 3];
                e_i[i] = 1.0;
                let mut e_j = [0.0; 3];
                e_j[j] = 1.0;
                let lhs = crate::linalg::mat_vec(phi, &self.bracket(&e_i, &e_j));
                let rhs = self.bracket(&col(i), &col(j));
                for n in 0..3 {
                    worst = worst.max((lhs[n] - rhs[n]).abs());
                }
            }
        }
        worst
    }
}
