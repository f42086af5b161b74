use serde::{Deserialize, Serialize};

use super::domination::{null_cone_domination, DominationCertificate};
use super::idempotents::{find_idempotents, Idempotent};
use crate::algebra::{FamilyId, LieAlgebra3};
use crate::error::{Error, Result};
use crate::linalg::{norm, sub, Mat3};
use crate::metric::{euler_arnold_field, BilinearForm, QuadraticField};
use crate::normal_form::{normal_form_form, Automorphism, NormalFormId, NormalFormTag, Status, verdict_from_table};

/// Machine-checkable evidence about completeness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    Idempotent(Idempotent),
    Domination(DominationCertificate),
    PositiveDefiniteIntegral { matrix: Mat3, min_eigenvalue: f64 },
    ExplicitFlow { description: String, max_error: f64 },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Idempotent(_) => "idempotent",
            Certificate::Domination(_) => "domination",
            Certificate::PositiveDefiniteIntegral { .. } => "positive_definite_integral",
            Certificate::ExplicitFlow { .. } => "explicit_flow",
        }
    }

    pub fn proves_incompleteness(&self) -> bool {
        matches!(self, Certificate::Idempotent(_) | Certificate::Domination(_))
    }
}

fn verified_idempotent(f: &QuadraticField) -> Option<Idempotent> {
    let found = match find_idempotents(f) {
        Ok(list) => list,
        Err(Error::NonIsolatedSolutionSet { sample }) => vec![Idempotent {
            point: sample,
            residual: norm(&sub(&f.eval(&sample), &sample)),
        }],
        Err(_) => return None,
    };
    found
        .into_iter()
        .filter(|i| i.verify(f).is_ok())
        .min_by(|a, b| {
            let neg = |i: &Idempotent| i.point.iter().filter(|x| **x < 0.0).count();
            neg(a).cmp(&neg(b)).then(norm(&a.point).total_cmp(&norm(&b.point)))
        })
}

fn certify(f: &QuadraticField, q: &BilinearForm) -> Option<Certificate> {
    if let Some(i) = verified_idempotent(f) {
        return Some(Certificate::Idempotent(i));
    }
    null_cone_domination(f, q)
        .filter(|c| c.verify(f, q).is_some())
        .map(Certificate::Domination)
}

/// A Lorentzian form on `g` together with a verified incompleteness certificate.
pub fn incompleteness_witness(g: &LieAlgebra3) -> Result<(BilinearForm, Certificate)> {
    match g.family() {
        FamilyId::Custom => Err(Error::UnsupportedAlgebra("custom algebras".into())),
        FamilyId::H(l) if l == -1.0 => Err(Error::UnsupportedAlgebra("h(-1) is unimodular".into())),
        FamilyId::H(lambda) => {
            for tag in [NormalFormTag::Q2, NormalFormTag::Q3, NormalFormTag::Q1, NormalFormTag::Q11, NormalFormTag::Q9] {
                let nf = NormalFormId {
                    tag,
                    param: None,
                    scale: 1.0,
                    phi: Automorphism::identity(),
                    residual: 0.0,
                };
                if !verdict_from_table(lambda, &nf).is_ok_and(|v| v.status == Status::Incomplete) {
                    continue;
                }
                let q = normal_form_form(tag, None)?;
                let f = euler_arnold_field(g, &q)?;
                if let Some(c) = certify(&f, &q) {
                    return Ok((q, c));
                }
            }
            Err(Error::Internal(format!("no certificate found for h({lambda})")))
        }
        FamilyId::Psh | FamilyId::E(_) => {
            let q = BilinearForm::diag([-1.0, 1.0, 1.0]);
            let f = euler_arnold_field(g, &q)?;
            let c = null_cone_domination(&f, &q)
                .filter(|c| c.verify(&f, &q).is_some())
                .ok_or_else(|| Error::Internal("no domination certificate for diag(-1,1,1)".into()))?;
            Ok((q, Certificate::Domination(c)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_lie_algebra, standard_family};

    #[test]
    fn examples() {
        let (q, c) = incompleteness_witness(&standard_family(FamilyId::E(2.0)).unwrap()).unwrap();
        assert_eq!(*q.matrix(), *BilinearForm::diag([-1.0, 1.0, 1.0]).matrix());
        match c {
            Certificate::Domination(d) => assert!((d.a - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let (q, c) = incompleteness_witness(&standard_family(FamilyId::H(0.5)).unwrap()).unwrap();
        assert_eq!(*q.matrix(), *normal_form_form(NormalFormTag::Q2, None).unwrap().matrix());
        match c {
            Certificate::Idempotent(i) => assert!(norm(&sub(&i.point, &[1.0, 1.0, 0.0])) < 1e-9),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            incompleteness_witness(&standard_family(FamilyId::H(-1.0)).unwrap()),
            Err(Error::UnsupportedAlgebra(_))
        ));
        assert!(matches!(
            incompleteness_witness(&make_lie_algebra([[[0.0; 3]; 3]; 3]).unwrap()),
            Err(Error::UnsupportedAlgebra(_))
        ));
    }

    #[test]
    fn h_one_and_psh() {
        let (_, c) = incompleteness_witness(&standard_family(FamilyId::H(1.0)).unwrap()).unwrap();
        assert!(c.proves_incompleteness());
        let (_, c) = incompleteness_witness(&standard_family(FamilyId::Psh).unwrap()).unwrap();
        assert_eq!(c.kind(), "domination");
    }
}
