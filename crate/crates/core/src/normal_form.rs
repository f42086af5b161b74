//! Normal forms of bilinear forms on `h(λ)` under `ℝ* × Aut(h(λ))` and the completeness table.
//!
//! A form `m` is written as `m = scale · φᵀ Q φ` where `Q` is one of the fixed
//! matrices `Q0 … Q12` and `φ` is an automorphism acting on column vectors.

use num::{BigRational, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebra3;
use crate::error::{Error, Result};
use crate::linalg::{
    congruence, frobenius, inverse, mat_mul, mat_scale, mat_sub, q_from_f64, q_to_f64, sym_eigen2, transpose, Mat3,
    QMat3, IDENTITY,
};
use crate::metric::{causal_character, BilinearForm, CausalCharacter};

/// Relative thresholds for the case split; values within 10× of them are ambiguous.
pub const DEGENERACY_TOL: f64 = 1e-10;
pub const ISOTROPY_TOL: f64 = 1e-10;
const AMBIGUITY_FACTOR: f64 = 10.0;
const RECONSTRUCTION_TOL: f64 = 1e-8;
const AUTOMORPHISM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NormalFormTag {
    Q0,
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
    Q6,
    Q7,
    Q8,
    Q9,
    Q10,
    Q11,
    Q12,
}

use NormalFormTag::*;

impl NormalFormTag {
    pub const ALL: [NormalFormTag; 13] = [Q0, Q1, Q2, Q3, Q4, Q5, Q6, Q7, Q8, Q9, Q10, Q11, Q12];
    pub const LORENTZIAN: [NormalFormTag; 12] = [Q1, Q2, Q3, Q4, Q5, Q6, Q7, Q8, Q9, Q10, Q11, Q12];

    pub fn name(&self) -> &'static str {
        ["Q0", "Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8", "Q9", "Q10", "Q11", "Q12"][*self as usize]
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|tag| tag.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::Parse(format!("unknown normal form `{s}`")))
    }

    pub fn has_param(&self) -> bool {
        matches!(self, Q4 | Q5 | Q6)
    }
}

impl std::fmt::Display for NormalFormTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_param(tag: NormalFormTag, param: Option<f64>) -> Result<()> {
    match (tag.has_param(), param) {
        (false, None) => Ok(()),
        (false, Some(_)) => Err(Error::ParameterOutOfRange(format!("{tag} takes no parameter"))),
        (true, None) => Err(Error::ParameterOutOfRange(format!("{tag} needs a parameter"))),
        (true, Some(p)) => {
            let ok = p.is_finite()
                && match tag {
                    Q4 => p != 1.0,
                    Q5 => p > -1.0,
                    _ => p > 1.0,
                };
            if ok {
                Ok(())
            } else {
                Err(Error::ParameterOutOfRange(format!("{tag} parameter {p}")))
            }
        }
    }
}

/// The fixed matrix of a normal form with an exact parameter.
pub fn normal_form_exact(tag: NormalFormTag, param: Option<&BigRational>) -> Result<QMat3> {
    check_param(tag, param.map(q_to_f64))?;
    let i = |n: i64| BigRational::from_integer(n.into());
    let p = param.cloned().unwrap_or_else(BigRational::zero);
    let rows: [[BigRational; 3]; 3] = match tag {
        Q0 => [[i(1), i(0), i(0)], [i(0), i(1), i(0)], [i(0), i(0), i(1)]],
        Q1 => [[i(1), i(0), i(0)], [i(0), i(1), i(0)], [i(0), i(0), i(-1)]],
        Q2 => [[i(1), i(0), i(0)], [i(0), i(-1), i(0)], [i(0), i(0), i(1)]],
        Q3 => [[i(-1), i(0), i(0)], [i(0), i(1), i(0)], [i(0), i(0), i(1)]],
        Q4 => [[i(1), i(0), i(0)], [i(0), i(1), i(1)], [i(0), i(1), p]],
        Q5 => [[i(1), i(0), i(0)], [i(0), i(-1), i(1)], [i(0), i(1), p]],
        Q6 => [[i(-1), i(0), i(0)], [i(0), i(1), i(1)], [i(0), i(1), p]],
        Q7 => [[i(1), i(0), i(0)], [i(0), i(0), i(1)], [i(0), i(1), i(1)]],
        Q8 => [[i(1), i(0), i(0)], [i(0), i(0), i(1)], [i(0), i(1), i(-1)]],
        Q9 => [[i(1), i(0), i(0)], [i(0), i(0), i(1)], [i(0), i(1), i(0)]],
        Q10 => [[i(0), i(0), i(1)], [i(0), i(1), i(1)], [i(1), i(1), i(1)]],
        Q11 => [[i(0), i(1), i(0)], [i(1), i(0), i(0)], [i(0), i(0), i(1)]],
        Q12 => [[i(0), i(0), i(1)], [i(0), i(1), i(0)], [i(1), i(0), i(0)]],
    };
    Ok(rows)
}

pub fn normal_form_matrix(tag: NormalFormTag, param: Option<f64>) -> Result<Mat3> {
    Ok(normal_form_form(tag, param)?.matrix().to_owned())
}

pub fn normal_form_form(tag: NormalFormTag, param: Option<f64>) -> Result<BilinearForm> {
    check_param(tag, param)?;
    let p = param.map(q_from_f64);
    BilinearForm::from_exact(normal_form_exact(tag, p.as_ref())?)
}

/// An automorphism of `h(λ)` as a matrix acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Automorphism {
    pub matrix: Mat3,
}

impl Automorphism {
    pub fn identity() -> Self {
        Automorphism { matrix: IDENTITY }
    }

    /// `[[1,0,0],[a,c,0],[b,0,d]]`, an automorphism of every `h(λ)`.
    pub fn standard(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if c == 0.0 || d == 0.0 {
            return Err(Error::InvalidAutomorphism { residual: f64::INFINITY });
        }
        Ok(Automorphism {
            matrix: [[1.0, 0.0, 0.0], [a, c, 0.0], [b, 0.0, d]],
        })
    }

    /// `[[-1,0,0],[a,0,c],[b,d,0]]`, an automorphism of `h(-1)` only.
    pub fn swapped(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if c == 0.0 || d == 0.0 {
            return Err(Error::InvalidAutomorphism { residual: f64::INFINITY });
        }
        Ok(Automorphism {
            matrix: [[-1.0, 0.0, 0.0], [a, 0.0, c], [b, d, 0.0]],
        })
    }

    /// `[[1,0,0],[a,g11,g12],[b,g21,g22]]`, an automorphism of `h(1)`.
    pub fn general_h1(a: f64, b: f64, g: [[f64; 2]; 2]) -> Result<Self> {
        if g[0][0] * g[1][1] - g[0][1] * g[1][0] == 0.0 {
            return Err(Error::InvalidAutomorphism { residual: f64::INFINITY });
        }
        Ok(Automorphism {
            matrix: [[1.0, 0.0, 0.0], [a, g[0][0], g[0][1]], [b, g[1][0], g[1][1]]],
        })
    }

    pub fn from_matrix(matrix: Mat3) -> Self {
        Automorphism { matrix }
    }

    pub fn validate_for(&self, g: &LieAlgebra3) -> Result<()> {
        let scale = 1.0 + crate::linalg::max_abs(&self.matrix);
        let residual = g.automorphism_residual(&self.matrix);
        if inverse(&self.matrix).is_none() || !(residual <= AUTOMORPHISM_TOL * scale * scale) {
            return Err(Error::InvalidAutomorphism { residual });
        }
        Ok(())
    }

    pub fn inverse(&self) -> Option<Self> {
        inverse(&self.matrix).map(|matrix| Automorphism { matrix })
    }

    pub fn compose(&self, other: &Automorphism) -> Self {
        Automorphism {
            matrix: mat_mul(&self.matrix, &other.matrix),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == IDENTITY
    }
}

fn symmetrized(m: &Mat3) -> Mat3 {
    let mut s = *m;
    for i in 0..3 {
        for j in 0..i {
            let v = 0.5 * (m[i][j] + m[j][i]);
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    s
}

/// `φᵀ m φ` after checking that `φ` preserves brackets of `g`.
pub fn apply_automorphism(g: &LieAlgebra3, q: &BilinearForm, phi: &Automorphism) -> Result<BilinearForm> {
    phi.validate_for(g)?;
    BilinearForm::new(symmetrized(&congruence(q.matrix(), &phi.matrix)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormId {
    pub tag: NormalFormTag,
    pub param: Option<f64>,
    /// Nonzero real factor; negative exactly when the input has signature (1, 2).
    pub scale: f64,
    pub phi: Automorphism,
    /// Relative Frobenius error of `scale · φᵀ Q φ` against the input.
    pub residual: f64,
}

impl NormalFormId {
    pub fn matrix(&self) -> Result<Mat3> {
        normal_form_matrix(self.tag, self.param)
    }

    pub fn reconstruct(&self) -> Result<Mat3> {
        Ok(mat_scale(&congruence(&self.matrix()?, &self.phi.matrix), self.scale))
    }
}

struct Thresholds {
    det: f64,
    entry: f64,
}

fn classify_small(value: f64, threshold: f64, invariant: &'static str) -> Result<bool> {
    let a = value.abs();
    if a <= threshold {
        Ok(true)
    } else if a <= AMBIGUITY_FACTOR * threshold {
        Err(Error::NumericallyAmbiguousCase {
            invariant,
            value,
            threshold,
        })
    } else {
        Ok(false)
    }
}

/// `ψ = [[1,0,0],[a,c,0],[b,0,d]]` with `ψᵀ m ψ = σ Q`; returns the canonical record.
fn finish(
    m: &Mat3,
    tag: NormalFormTag,
    param: Option<f64>,
    sigma: f64,
    (a, b, c, d): (f64, f64, f64, f64),
) -> Result<NormalFormId> {
    let phi = Automorphism {
        matrix: [[1.0, 0.0, 0.0], [-a / c, 1.0 / c, 0.0], [-b / d, 0.0, 1.0 / d]],
    };
    let id = NormalFormId {
        tag,
        param,
        scale: sigma,
        phi,
        residual: 0.0,
    };
    verified(id, m)
}

fn verified(mut id: NormalFormId, m: &Mat3) -> Result<NormalFormId> {
    let rec = id.reconstruct()?;
    let err = frobenius(&mat_sub(&rec, m)) / frobenius(m);
    if !(err <= RECONSTRUCTION_TOL) {
        return Err(Error::Internal(format!(
            "reconstruction of {} (param {:?}) misses the input by {err:e}",
            id.tag, id.param
        )));
    }
    id.residual = err;
    Ok(id)
}

/// Reduction under the identity component `[[1,0,0],[a,c,0],[b,0,d]]`, shared by all `λ`.
fn canonicalize_standard(m: &Mat3, sign: f64, thr: &Thresholds) -> Result<NormalFormId> {
    let (m1, m2, m3) = (m[0][0], m[0][1], m[0][2]);
    let (m4, m5, m6) = (m[1][1], m[1][2], m[2][2]);
    let det_d = m4 * m6 - m5 * m5;
    let degenerate = classify_small(det_d, thr.det, "det of the e2,e3 block")?;
    let iso2 = classify_small(m4, thr.entry, "m4")?;
    let iso3 = classify_small(m6, thr.entry, "m6")?;

    if !degenerate {
        let a = -(m6 * m2 - m5 * m3) / det_d;
        let b = -(m4 * m3 - m5 * m2) / det_d;
        let kappa = m1 + a * m2 + b * m3;
        let sigma = sign * kappa.abs();
        if sigma == 0.0 {
            return Err(Error::DegenerateForm);
        }
        let eps = kappa / sigma;
        let (p, f, g) = (m4 / sigma, m5 / sigma, m6 / sigma);
        if !iso2 {
            let zero5 = classify_small(m5, thr.entry, "m5")?;
            if zero5 {
                let c = 1.0 / p.abs().sqrt();
                let d = 1.0 / g.abs().sqrt();
                let tag = match (eps > 0.0, p > 0.0, g > 0.0) {
                    (true, true, true) => Q0,
                    (true, true, false) => Q1,
                    (true, false, true) => Q2,
                    (false, true, true) => Q3,
                    _ => return Err(Error::Internal("diagonal case outside the normal-form list".into())),
                };
                return finish(m, tag, None, sigma, (a, b, c, d));
            }
            let c = 1.0 / p.abs().sqrt();
            let d = p.abs().sqrt() / f;
            let param = if iso3 { 0.0 } else { p.abs() * g / (f * f) };
            let tag = match (eps > 0.0, p > 0.0) {
                (true, true) => Q4,
                (true, false) => Q5,
                (false, true) => Q6,
                (false, false) => return Err(Error::Internal("negative e1 with negative e2 block".into())),
            };
            return finish(m, tag, Some(param), sigma, (a, b, c, d));
        }
        if eps < 0.0 {
            return Err(Error::Internal("isotropic e2 with negative e1 normalization".into()));
        }
        if !iso3 {
            let d = 1.0 / g.abs().sqrt();
            let c = 1.0 / (d * f);
            let tag = if g > 0.0 { Q7 } else { Q8 };
            return finish(m, tag, None, sigma, (a, b, c, d));
        }
        return finish(m, Q9, None, sigma, (a, b, 1.0, 1.0 / f));
    }

    match (iso2, iso3) {
        (false, false) => {
            let rho = m5 / m4;
            let g = -m2 / m4;
            let w3 = m3 - rho * m2;
            if w3 == 0.0 {
                return Err(Error::DegenerateForm);
            }
            let b = -(m1 + 2.0 * m2 * g + m4 * g * g) / (2.0 * w3);
            let a = g - rho * b;
            let sigma = w3 * w3 / m6;
            let d = w3 / m6;
            let c = sigma / (d * m5);
            finish(m, Q10, None, sigma, (a, b, c, d))
        }
        (true, false) => {
            if m2 == 0.0 {
                return Err(Error::DegenerateForm);
            }
            let b = -m3 / m6;
            let a = -(m1 - m3 * m3 / m6) / (2.0 * m2);
            let sigma = m6;
            finish(m, Q11, None, sigma, (a, b, sigma / m2, 1.0))
        }
        (false, true) => {
            if m3 == 0.0 {
                return Err(Error::DegenerateForm);
            }
            let a = -m2 / m4;
            let b = -(m1 - m2 * m2 / m4) / (2.0 * m3);
            let sigma = m4;
            finish(m, Q12, None, sigma, (a, b, 1.0, sigma / m3))
        }
        (true, true) => Err(Error::DegenerateForm),
    }
}

fn thresholds(m: &Mat3) -> Thresholds {
    let n = frobenius(m);
    Thresholds {
        det: DEGENERACY_TOL * n * n,
        entry: ISOTROPY_TOL * n,
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("lambda must satisfy |lambda| <= 1, got {lambda}")))
    }
}

/// The swap `e2 ↔ e3, e1 ↦ −e1`, an automorphism of `h(−1)` and an involution.
pub const SWAP_H_MINUS_ONE: Mat3 = [[-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]];

/// Whether a tag/parameter pair is in the reduced list used for `λ = −1`.
pub fn in_minus_one_list(tag: NormalFormTag, param: Option<f64>) -> bool {
    match tag {
        Q0 | Q1 | Q3 | Q6 | Q9 | Q10 | Q11 => true,
        Q4 => param.is_some_and(|r| r < 1.0),
        Q5 => param.is_some_and(|s| s > -1.0 && s <= 0.0),
        _ => false,
    }
}

pub fn in_plus_one_list(tag: NormalFormTag) -> bool {
    matches!(tag, Q0 | Q1 | Q3 | Q11)
}

fn canonicalize_any(lambda: f64, m: &Mat3, sign: f64) -> Result<NormalFormId> {
    let thr = thresholds(m);
    if lambda == -1.0 {
        let direct = canonicalize_standard(m, sign, &thr)?;
        if in_minus_one_list(direct.tag, direct.param) {
            return Ok(direct);
        }
        let swapped = congruence(m, &SWAP_H_MINUS_ONE);
        let mut other = canonicalize_standard(&swapped, sign, &thr)?;
        if !in_minus_one_list(other.tag, other.param) {
            return Err(Error::Internal(format!(
                "neither {} nor {} lies in the reduced list",
                direct.tag, other.tag
            )));
        }
        other.phi = Automorphism {
            matrix: mat_mul(&other.phi.matrix, &SWAP_H_MINUS_ONE),
        };
        return verified(other, m);
    }
    if lambda == 1.0 {
        let (vals, vecs) = sym_eigen2(sign * m[1][1], sign * m[1][2], sign * m[2][2]);
        // Columns ordered by descending `sign·D` eigenvalue, a kernel vector first if one exists.
        let kernel_tol = thr.entry;
        let order = if vals[0].abs() <= kernel_tol && vals[1].abs() > kernel_tol {
            [0, 1]
        } else if vals[1].abs() <= kernel_tol && vals[0].abs() > kernel_tol {
            [1, 0]
        } else {
            [1, 0]
        };
        let mut h = IDENTITY;
        for (col, &k) in order.iter().enumerate() {
            h[1][col + 1] = vecs[0][k];
            h[2][col + 1] = vecs[1][k];
        }
        let rotated = symmetrized(&congruence(m, &h));
        let mut id = canonicalize_standard(&rotated, sign, &thr)?;
        if !in_plus_one_list(id.tag) {
            return Err(Error::Internal(format!("{} outside the lambda = 1 list", id.tag)));
        }
        id.phi = Automorphism {
            matrix: mat_mul(&id.phi.matrix, &transpose(&h)),
        };
        return verified(id, m);
    }
    canonicalize_standard(m, sign, &thr)
}

/// Canonical form of a Lorentzian `q` on `h(λ)`.
pub fn canonicalize(lambda: f64, q: &BilinearForm) -> Result<NormalFormId> {
    check_lambda(lambda)?;
    let sign = match q.signature() {
        (2, 1, 0) => 1.0,
        (1, 2, 0) => -1.0,
        (p, n, z) => return Err(Error::NotLorentzian(p, n, z)),
    };
    canonicalize_any(lambda, q.matrix(), sign)
}

/// Canonical form of a definite `q`: `Q0` or `Q4` with `r > 1`.
pub fn canonicalize_riemannian(lambda: f64, q: &BilinearForm) -> Result<NormalFormId> {
    check_lambda(lambda)?;
    let sign = match q.signature() {
        (3, 0, 0) => 1.0,
        (0, 3, 0) => -1.0,
        (p, n, z) => {
            return Err(Error::ParameterOutOfRange(format!("form is not definite: signature ({p}, {n}, {z})")))
        }
    };
    let id = canonicalize_standard(q.matrix(), sign, &thresholds(q.matrix()))?;
    debug_assert!(id.tag == Q0 || (id.tag == Q4 && id.param.is_some_and(|r| r > 1.0)));
    Ok(id)
}

pub fn orbit_equal(lambda: f64, q1: &BilinearForm, q2: &BilinearForm) -> Result<bool> {
    let a = canonicalize(lambda, q1)?;
    let b = canonicalize(lambda, q2)?;
    Ok(a.tag == b.tag
        && match (a.param, b.param) {
            (Some(x), Some(y)) => (x - y).abs() <= 1e-7,
            (None, None) => true,
            _ => false,
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Complete,
    Incomplete,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundedness {
    AllBounded,
    UnboundedExist,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mechanism {
    Idempotent,
    NoIdempotentNullCone,
    PositiveDefiniteIntegral,
    ExplicitFlow,
    PartialInvariantCompactness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub boundedness: Boundedness,
    pub mechanism: Mechanism,
    pub citation: String,
}

impl Verdict {
    fn incomplete(mechanism: Mechanism, citation: &str) -> Self {
        Verdict {
            status: Status::Incomplete,
            boundedness: Boundedness::NotApplicable,
            mechanism,
            citation: citation.into(),
        }
    }

    fn complete(boundedness: Boundedness, mechanism: Mechanism, citation: &str) -> Self {
        Verdict {
            status: Status::Complete,
            boundedness,
            mechanism,
            citation: citation.into(),
        }
    }

    /// The status/mechanism pairing every verdict must satisfy.
    pub fn is_consistent(&self) -> bool {
        match self.status {
            Status::Incomplete => matches!(self.mechanism, Mechanism::Idempotent | Mechanism::NoIdempotentNullCone),
            Status::Complete => matches!(
                self.mechanism,
                Mechanism::PositiveDefiniteIntegral | Mechanism::ExplicitFlow | Mechanism::PartialInvariantCompactness
            ),
            Status::Undecided => true,
        }
    }
}

fn invalid(lambda: f64, nf: &NormalFormId) -> Error {
    Error::TagInvalidForLambda {
        lambda,
        tag: nf.tag,
        param: nf.param,
    }
}

/// Completeness of a Lorentzian normal form on `h(λ)`.
pub fn verdict_from_table(lambda: f64, nf: &NormalFormId) -> Result<Verdict> {
    check_lambda(lambda)?;
    let p = nf.param;
    if check_param(nf.tag, p).is_err() || nf.tag == Q0 || (nf.tag == Q4 && p.is_some_and(|r| r > 1.0)) {
        return Err(invalid(lambda, nf));
    }
    let pv = p.unwrap_or(0.0);
    use Boundedness::*;
    use Mechanism::*;
    if lambda == 1.0 {
        if !in_plus_one_list(nf.tag) {
            return Err(invalid(lambda, nf));
        }
        return Ok(Verdict::incomplete(Idempotent, "h(1): every Lorentzian normal form has an idempotent"));
    }
    if lambda == -1.0 {
        if !in_minus_one_list(nf.tag, p) {
            return Err(invalid(lambda, nf));
        }
        return Ok(match nf.tag {
            Q5 if pv < 0.0 => Verdict::complete(
                AllBounded,
                PositiveDefiniteIntegral,
                "h(-1), Q5 with -1<s<0: energy plus twice y^2+(s-1)yz-sz^2 is positive definite",
            ),
            Q5 => Verdict::complete(
                UnboundedExist,
                ExplicitFlow,
                "h(-1), Q5 with s=0: x^2+y^2 and y^2-yz are conserved, so the flow is global",
            ),
            Q9 => Verdict::complete(
                UnboundedExist,
                ExplicitFlow,
                "h(-1), Q9: flow (x0, y0 e^(-x0 t), z0 e^(x0 t))",
            ),
            _ => Verdict::incomplete(Idempotent, "h(-1): remaining normal forms have idempotents"),
        });
    }
    if lambda == 0.0 {
        return Ok(match nf.tag {
            Q2 | Q3 | Q6 | Q7 | Q10 | Q11 => {
                Verdict::incomplete(Idempotent, "h(0): center spacelike, idempotent exists")
            }
            Q4 if pv > 0.0 => Verdict::incomplete(Idempotent, "h(0): center spacelike, idempotent exists"),
            Q5 if pv > 0.0 => Verdict::incomplete(Idempotent, "h(0): center spacelike, idempotent exists"),
            Q1 | Q8 => Verdict::complete(
                AllBounded,
                PositiveDefiniteIntegral,
                "h(0): center timelike, positive-definite quadratic integral",
            ),
            Q4 | Q5 if pv < 0.0 => Verdict::complete(
                AllBounded,
                PositiveDefiniteIntegral,
                "h(0): center timelike, positive-definite quadratic integral",
            ),
            Q4 | Q5 | Q9 => Verdict::incomplete(
                NoIdempotentNullCone,
                "h(0): center lightlike and not orthogonal to the derived algebra, x' = x^2/2 on a null level set",
            ),
            Q12 => Verdict::complete(
                UnboundedExist,
                ExplicitFlow,
                "h(0): center lightlike and orthogonal to the derived algebra, explicit exponential flow",
            ),
            Q0 => unreachable!(),
        });
    }
    Ok(match nf.tag {
        Q5 if pv > -1.0 && pv < 0.0 => Verdict::complete(
            AllBounded,
            PartialInvariantCompactness,
            "h(lambda), 0<|lambda|<1: e2 and e3 timelike, level sets of energy and xi/eta^lambda are bounded",
        ),
        Q8 => Verdict::complete(
            UnboundedExist,
            PartialInvariantCompactness,
            "h(lambda), 0<|lambda|<1: e3 timelike and e2 lightlike, invariant (y-z)/z^lambda bounds curves off z=0",
        ),
        Q5 if pv == 0.0 => Verdict::incomplete(
            NoIdempotentNullCone,
            "h(lambda), 0<|lambda|<1: x' = (lambda+1)/2 x^2 + (1-lambda)/2 y^2 on the null cone",
        ),
        Q9 => Verdict::incomplete(
            NoIdempotentNullCone,
            "h(lambda), 0<|lambda|<1: x' = (lambda+1)/2 x^2 on the null cone",
        ),
        _ => Verdict::incomplete(Idempotent, "h(lambda), 0<|lambda|<1: idempotent exists"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterDerived {
    pub center_char: CausalCharacter,
    pub derived_char: CausalCharacter,
    pub orthogonal: bool,
}

/// Causal characters of `e3` (center) and `e2` (derived algebra) for `h(0)`,
/// read after scaling the form to signature (2, 1).
pub fn center_derived_classification(q: &BilinearForm) -> Result<CenterDerived> {
    let m = match q.signature() {
        (1, 2, 0) => BilinearForm::new(mat_scale(q.matrix(), -1.0))?,
        _ => q.clone(),
    };
    Ok(CenterDerived {
        center_char: causal_character(&m, &[0.0, 0.0, 1.0])?,
        derived_char: causal_character(&m, &[0.0, 1.0, 0.0])?,
        orthogonal: m.matrix()[1][2].abs() <= ISOTROPY_TOL * m.norm(),
    })
}

/// The center/derived decision rule for `h(0)`.
pub fn center_derived_verdict(r: &CenterDerived) -> Verdict {
    use Boundedness::*;
    use Mechanism::*;
    match (r.center_char, r.orthogonal) {
        (CausalCharacter::Spacelike, _) => Verdict::incomplete(Idempotent, "h(0): center spacelike"),
        (CausalCharacter::Timelike, _) => Verdict::complete(AllBounded, PositiveDefiniteIntegral, "h(0): center timelike"),
        (CausalCharacter::Lightlike, false) => {
            Verdict::incomplete(NoIdempotentNullCone, "h(0): center lightlike, not orthogonal to the derived algebra")
        }
        (CausalCharacter::Lightlike, true) => {
            Verdict::complete(UnboundedExist, ExplicitFlow, "h(0): center lightlike, orthogonal to the derived algebra")
        }
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn tag_and_param() -> impl Strategy<Value = (NormalFormTag, Option<f64>)> {
        prop_oneof![
            prop::sample::select(vec![Q1, Q2, Q3, Q7, Q8, Q9, Q10, Q11, Q12]).prop_map(|t| (t, None)),
            (-3.0..0.9f64).prop_map(|r| (Q4, Some(r))),
            (-0.9..3.0f64).prop_map(|s| (Q5, Some(s))),
            (1.1..4.0f64).prop_map(|t| (Q6, Some(t))),
            Just((Q4, Some(0.0))),
            Just((Q5, Some(0.0))),
        ]
    }

    fn automorphism() -> impl Strategy<Value = Automorphism> {
        (-2.0..2.0f64, -2.0..2.0f64, 0.3..2.0f64, 0.3..2.0f64, any::<bool>(), any::<bool>()).prop_map(
            |(a, b, c, d, sc, sd)| {
                Automorphism::standard(a, b, if sc { c } else { -c }, if sd { d } else { -d }).unwrap()
            },
        )
    }

    fn scale() -> impl Strategy<Value = f64> {
        (0.2..5.0f64, any::<bool>()).prop_map(|(s, neg)| if neg { -s } else { s })
    }

    fn moved(tag: NormalFormTag, p: Option<f64>, phi: &Automorphism, s: f64) -> BilinearForm {
        let q = normal_form_form(tag, p).unwrap();
        BilinearForm::new(symmetrized(&mat_scale(&congruence(q.matrix(), &phi.matrix), s))).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn round_trip((tag, p) in tag_and_param(), phi in automorphism(), s in scale(), lambda in -0.95..0.95f64) {
            let q = moved(tag, p, &phi, s);
            let id = canonicalize(lambda, &q).unwrap();
            prop_assert_eq!(id.tag, tag);
            match (id.param, p) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-7, "{} vs {}", x, y),
                (None, None) => {}
                other => prop_assert!(false, "param mismatch {:?}", other),
            }
            prop_assert!(id.residual <= 1e-8);
        }

        #[test]
        fn verdict_is_orbit_invariant((tag, p) in tag_and_param(), phi in automorphism(), psi in automorphism(), s in scale(),
                                      lambda in prop::sample::select(vec![-1.0, -0.5, 0.0, 0.25, 0.75, 1.0])) {
            let q = moved(tag, p, &phi, s);
            let q2 = BilinearForm::new(symmetrized(&congruence(q.matrix(), &psi.matrix))).unwrap();
            let a = canonicalize(lambda, &q).unwrap();
            let b = canonicalize(lambda, &q2).unwrap();
            prop_assert_eq!(a.tag, b.tag);
            prop_assert_eq!(verdict_from_table(lambda, &a).unwrap(), verdict_from_table(lambda, &b).unwrap());
        }

        #[test]
        fn zero_lambda_rule_agrees((tag, p) in tag_and_param(), phi in automorphism(), s in scale()) {
            let q = moved(tag, p, &phi, s);
            let table = verdict_from_table(0.0, &canonicalize(0.0, &q).unwrap()).unwrap();
            let rule = center_derived_verdict(&center_derived_classification(&q).unwrap());
            prop_assert_eq!((table.status, table.boundedness, table.mechanism), (rule.status, rule.boundedness, rule.mechanism));
        }
    }
}
