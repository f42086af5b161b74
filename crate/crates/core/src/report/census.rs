use serde::{Deserialize, Serialize};

use crate::algebra::{standard_family, FamilyId};
use crate::dynamics::find_idempotents_with_seeds;
use crate::error::{Error, Result};
use crate::linalg::{norm, sub, Vec3};
use crate::metric::euler_arnold_field;
use crate::normal_form::{normal_form_form, NormalFormTag};

const MATCH_TOL: f64 = 1e-9;

/// Row parameters covered by the census: `r` for `Q4`, `s` for `Q5`, `t` for `Q6`.
pub const CENSUS_PARAMS: [(NormalFormTag, &[f64]); 3] = [
    (NormalFormTag::Q4, &[0.5, 0.0, -0.5]),
    (NormalFormTag::Q5, &[0.5, 0.0, -0.5]),
    (NormalFormTag::Q6, &[2.0, 3.0]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    pub expected: Vec<Vec3>,
    pub found: Vec<Vec3>,
    /// Largest distance from an expected point to its match.
    pub max_error: f64,
}

/// `v` and its image under the automorphism `(x, y, z) ↦ (x, −y, −z)`, which fixes
/// the block-diagonal forms `Q4`, `Q5`, `Q6` and hence maps idempotents to idempotents.
fn mirrored(v: Vec3) -> [Vec3; 2] {
    [v, [v[0], -v[1], -v[2]]]
}

/// The closed-form idempotent list of a Lorentzian normal form on `h(λ)`, `|λ| < 1`.
pub fn expected_idempotents(lambda: f64, tag: NormalFormTag, param: Option<f64>) -> Vec<Vec3> {
    use NormalFormTag::*;
    let l = lambda;
    let nz = l != 0.0;
    let p = param.unwrap_or(0.0);
    let mut out = Vec::new();
    match tag {
        Q1 if nz => out.extend([[1.0 / l, 0.0, 1.0 / l], [1.0 / l, 0.0, -1.0 / l]]),
        Q2 => out.extend([[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]]),
        Q3 => {
            out.extend([[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]]);
            if nz {
                out.extend([[1.0 / l, 0.0, 1.0 / l], [1.0 / l, 0.0, -1.0 / l]]);
            }
        }
        Q4 => {
            if p > 0.0 && p < 1.0 {
                let k = (p - p * p).sqrt();
                out.extend(mirrored([1.0, -p / k, 1.0 / k]));
            }
            if nz && p < 1.0 {
                let k = l * (1.0 - p).sqrt();
                out.extend(mirrored([1.0 / l, -1.0 / k, 1.0 / k]));
            }
        }
        Q5 if p > 0.0 => {
            let k = (p + p * p).sqrt();
            out.extend(mirrored([1.0, -p / k, 1.0 / k]));
        }
        Q6 => {
            let k = (p * p - p).sqrt();
            out.extend(mirrored([1.0, -p / k, 1.0 / k]));
            if nz {
                let k = l * (p - 1.0).sqrt();
                out.extend(mirrored([1.0 / l, -1.0 / k, 1.0 / k]));
            }
        }
        Q7 => out.extend([[1.0, 1.0, -1.0], [1.0, -1.0, 1.0]]),
        Q10 => {
            out.push([1.0, -0.5, -0.5]);
            if nz {
                out.push([1.0 / l, 0.0, 0.0]);
            }
        }
        Q11 => out.push([1.0, 0.0, 0.0]),
        Q12 if nz => out.push([1.0 / l, 0.0, 0.0]),
        _ => {}
    }
    out
}

fn census_row(lambda: f64, tag: NormalFormTag, param: Option<f64>) -> Result<CensusRow> {
    let g = standard_family(FamilyId::H(lambda))?;
    let f = euler_arnold_field(&g, &normal_form_form(tag, param)?)?;
    let expected = expected_idempotents(lambda, tag, param);
    let found: Vec<Vec3> = find_idempotents_with_seeds(&f, &expected)?.into_iter().map(|i| i.point).collect();
    let label = match param {
        Some(p) => format!("{tag}({p}) at lambda = {lambda}"),
        None => format!("{tag} at lambda = {lambda}"),
    };
    if found.len() != expected.len() {
        return Err(Error::CensusMismatch(format!(
            "{label}: expected {} idempotents {expected:?}, found {} {found:?}",
            expected.len(),
            found.len()
        )));
    }
    let mut max_error = 0.0_f64;
    for e in &expected {
        let d = found.iter().map(|v| norm(&sub(v, e))).fold(f64::INFINITY, f64::min);
        if !(d <= MATCH_TOL) {
            return Err(Error::CensusMismatch(format!("{label}: {e:?} not found (nearest at distance {d:e})")));
        }
        max_error = max_error.max(d);
    }
    Ok(CensusRow {
        tag: tag.name().into(),
        param,
        expected,
        found,
        max_error,
    })
}

/// The `(tag, param)` rows the census covers.
pub fn census_rows() -> Vec<(NormalFormTag, Option<f64>)> {
    let mut rows = Vec::new();
    for tag in NormalFormTag::LORENTZIAN {
        match CENSUS_PARAMS.iter().find(|(t, _)| *t == tag) {
            Some((_, ps)) => rows.extend(ps.iter().map(|p| (tag, Some(*p)))),
            None => rows.push((tag, None)),
        }
    }
    rows
}

/// Checks the closed-form idempotent lists against the numeric search for `h(λ)`.
pub fn census(lambda: f64) -> Result<Vec<CensusRow>> {
    if !(lambda.abs() < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("census needs |lambda| < 1, got {lambda}")));
    }
    census_rows().into_iter().map(|(tag, p)| census_row(lambda, tag, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(rows: &[CensusRow], tag: &str, param: Option<f64>) -> CensusRow {
        rows.iter().find(|r| r.tag == tag && r.param == param).unwrap().clone()
    }

    #[test]
    fn examples() {
        let zero = census(0.0).unwrap();
        assert_eq!(row(&zero, "Q7", None).expected, vec![[1.0, 1.0, -1.0], [1.0, -1.0, 1.0]]);
        let half = census(0.5).unwrap();
        assert_eq!(row(&half, "Q10", None).expected, vec![[1.0, -0.5, -0.5], [2.0, 0.0, 0.0]]);
        let q6 = row(&half, "Q6", Some(2.0));
        let s2 = 2f64.sqrt();
        let want = [[1.0, -s2, 1.0 / s2], [1.0, s2, -1.0 / s2], [2.0, -2.0, 2.0], [2.0, 2.0, -2.0]];
        assert_eq!(q6.expected.len(), 4);
        for (a, b) in q6.expected.iter().zip(want) {
            assert!(norm(&sub(a, &b)) < 1e-12);
        }
    }

    #[test]
    fn all_lambdas_pass() {
        for l in [0.0, 0.25, 0.5, 0.75, -0.25, -0.5, -0.75] {
            for r in census(l).unwrap() {
                assert!(r.max_error <= MATCH_TOL);
            }
        }
    }

    #[test]
    fn out_of_scope() {
        assert!(census(1.0).is_err());
        assert!(census(f64::NAN).is_err());
    }
}
