use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::h_exact;
use crate::dynamics::{find_idempotents, find_invariant_planes};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, q_to_f64, Vec3};
use crate::metric::{euler_arnold_field_exact, BilinearForm};
use crate::normal_form::{normal_form_exact, NormalFormTag};

/// One row of the geodesic-field table for `h(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    /// `x'`, `y'`, `z'` with exact rational coefficients.
    pub field: [String; 3],
    /// The two invariant planes of the row, as normals.
    pub planes: Vec<Vec3>,
    /// Further invariant planes found numerically.
    pub extra_planes: Vec<Vec3>,
    /// The idempotent column, conditions evaluated.
    pub idempotents: bool,
    pub idempotents_found: usize,
}

/// Parses `3`, `-0.25` or `1/3` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let den = num::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(digits, den);
    Ok(if neg { -v } else { v })
}

/// The table's invariant planes for a row, as normals.
pub fn table_planes(tag: NormalFormTag, param: f64) -> Vec<Vec3> {
    use NormalFormTag::*;
    match tag {
        Q1 | Q2 | Q3 | Q9 => vec![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        Q4 | Q6 => vec![[0.0, 1.0, 1.0], [0.0, 1.0, param]],
        Q5 => vec![[0.0, 1.0, -1.0], [0.0, 1.0, param]],
        Q7 => vec![[0.0, 1.0, 1.0], [0.0, 0.0, 1.0]],
        Q8 => vec![[0.0, 1.0, -1.0], [0.0, 0.0, 1.0]],
        Q10 => vec![[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]],
        Q11 => vec![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        Q12 => vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        Q0 => Vec::new(),
    }
}

/// The idempotent column with its conditions; `Q4` reads as `(0<r<1) or (λ≠0 and r<1)`.
pub fn table_has_idempotents(lambda: &BigRational, tag: NormalFormTag, param: Option<&BigRational>) -> bool {
    use NormalFormTag::*;
    let nonzero = !lambda.is_zero();
    let p = param.cloned().unwrap_or_else(BigRational::zero);
    let one = BigRational::one();
    match tag {
        Q1 | Q12 => nonzero,
        Q2 | Q3 | Q6 | Q7 | Q10 | Q11 => true,
        Q4 => (p.is_positive() && p < one) || (nonzero && p < one),
        Q5 => p.is_positive(),
        Q0 | Q8 | Q9 => false,
    }
}

fn unit(n: &Vec3) -> Vec3 {
    let l = norm(n);
    n.map(|x| x / l)
}

fn row(lambda: &BigRational, tag: NormalFormTag, param: Option<&BigRational>) -> Result<Table1Row> {
    let g = h_exact(lambda)?;
    let q = BilinearForm::from_exact(normal_form_exact(tag, param)?)?;
    let exact = euler_arnold_field_exact(&g, &q)?;
    let f = exact.to_float();
    let planes = table_planes(tag, param.map(q_to_f64).unwrap_or(0.0));
    let listed: Vec<Vec3> = planes.iter().map(unit).collect();
    let extra_planes = find_invariant_planes(&f)
        .planes
        .into_iter()
        .map(|p| p.normal)
        .filter(|n| !listed.iter().any(|m| dot(m, n).abs() > 1.0 - 1e-8))
        .collect();
    let idempotents_found = match find_idempotents(&f) {
        Ok(list) => list.len(),
        Err(Error::NonIsolatedSolutionSet { .. }) => usize::MAX,
        Err(e) => return Err(e),
    };
    Ok(Table1Row {
        tag: tag.name().into(),
        param: param.map(|p| p.to_string()),
        field: exact.polynomials(),
        planes,
        extra_planes,
        idempotents: table_has_idempotents(lambda, tag, param),
        idempotents_found,
    })
}

/// The table for `h(λ)` with row parameters `r = 1/2`, `s = −3/10`, `t = 2`.
pub fn table1(lambda: &BigRational) -> Result<Vec<Table1Row>> {
    table1_with(
        lambda,
        &BigRational::new(1.into(), 2.into()),
        &BigRational::new((-3).into(), 10.into()),
        &BigRational::from_integer(2.into()),
    )
}

pub fn table1_with(lambda: &BigRational, r: &BigRational, s: &BigRational, t: &BigRational) -> Result<Vec<Table1Row>> {
    let one = BigRational::one();
    if lambda.abs() >= one {
        return Err(Error::ParameterOutOfRange(format!("table rows need |lambda| < 1, got {lambda}")));
    }
    if r >= &one || s <= &-one.clone() || t <= &one {
        return Err(Error::ParameterOutOfRange(format!("row parameters r={r}, s={s}, t={t}")));
    }
    NormalFormTag::LORENTZIAN
        .iter()
        .map(|&tag| {
            let p = match tag {
                NormalFormTag::Q4 => Some(r),
                NormalFormTag::Q5 => Some(s),
                NormalFormTag::Q6 => Some(t),
                _ => None,
            };
            row(lambda, tag, p)
        })
        .collect()
}
