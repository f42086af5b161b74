use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inverse, mat_vec, norm, sub, to_na, Mat3, Vec3};
use crate::metric::QuadraticField;

/// A point with `F(v) = v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Idempotent {
    pub point: Vec3,
    pub residual: f64,
}

impl Idempotent {
    pub fn tolerance(v: &Vec3) -> f64 {
        1e-9 * (1.0 + norm(v).powi(2))
    }

    /// Recomputes the residual against `f` and checks it.
    pub fn verify(&self, f: &QuadraticField) -> Result<f64> {
        let r = residual(f, &self.point);
        if r <= Self::tolerance(&self.point) && norm(&self.point) > MIN_NORM {
            Ok(r)
        } else {
            Err(Error::Internal(format!("{:?} is not an idempotent (residual {r:e})", self.point)))
        }
    }
}

const GRID_SIDE: usize = 13;
const GRID_RADIUS: f64 = 4.0;
const MAX_ITER: usize = 60;
const MIN_NORM: f64 = 1e-6;
const MAX_NORM: f64 = 1e6;
const DEDUPE: f64 = 1e-6;
const SINGULAR_RATIO: f64 = 1e-8;
const PROBE: f64 = 1e-3;
// Newton must actually converge; the looser type bound alone admits far-out near-misses.
const CONVERGED: f64 = 1e-12;

fn residual(f: &QuadraticField, v: &Vec3) -> f64 {
    norm(&sub(&f.eval(v), v))
}

/// The fixed 13³ seed lattice on `[−4, 4]³`.
pub fn seed_grid() -> Vec<Vec3> {
    let step = 2.0 * GRID_RADIUS / (GRID_SIDE - 1) as f64;
    let coord = |i: usize| -GRID_RADIUS + step * i as f64;
    let mut seeds = Vec::with_capacity(GRID_SIDE.pow(3));
    for i in 0..GRID_SIDE {
        for j in 0..GRID_SIDE {
            for k in 0..GRID_SIDE {
                seeds.push([coord(i), coord(j), coord(k)]);
            }
        }
    }
    seeds
}

fn newton_direction(j: &Mat3, g: &Vec3) -> Vec3 {
    if let Some(inv) = inverse(j) {
        let d = mat_vec(&inv, g);
        return [-d[0], -d[1], -d[2]];
    }
    let svd = to_na(j).svd(true, true);
    let rhs = Vector3::new(-g[0], -g[1], -g[2]);
    match svd.solve(&rhs, 1e-12 * svd.singular_values.max().max(1e-300)) {
        Ok(d) => [d[0], d[1], d[2]],
        Err(_) => [0.0; 3],
    }
}

/// Damped Newton on `F(v) − v`; the step is halved while the residual grows.
fn newton(f: &QuadraticField, seed: &Vec3) -> Option<Vec3> {
    let mut v = *seed;
    let mut r = residual(f, &v);
    for _ in 0..MAX_ITER {
        if r <= 1e-15 * (1.0 + norm(&v).powi(2)) {
            break;
        }
        let mut j = f.jacobian(&v);
        for (i, row) in j.iter_mut().enumerate() {
            row[i] -= 1.0;
        }
        let g = sub(&f.eval(&v), &v);
        let d = newton_direction(&j, &g);
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = [v[0] + t * d[0], v[1] + t * d[1], v[2] + t * d[2]];
            let rc = residual(f, &cand);
            if rc < r {
                v = cand;
                r = rc;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved || norm(&v) > MAX_NORM {
            break;
        }
    }
    let n = norm(&v);
    (n > MIN_NORM && n < MAX_NORM && r <= CONVERGED * (1.0 + n)).then_some(v)
}

fn lex(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2]))
}

/// Checks whether a root sits on a curve of roots: a near-singular `DF − I`
/// together with a distinct root found after a small push along its kernel.
fn continuum_at(f: &QuadraticField, v: &Vec3) -> bool {
    let mut j = f.jacobian(v);
    for (i, row) in j.iter_mut().enumerate() {
        row[i] -= 1.0;
    }
    let svd = Matrix3::from_fn(|a, b| j[a][b]).svd(false, true);
    let s = svd.singular_values;
    let (imin, smin) = s.argmin();
    if smin > SINGULAR_RATIO * s.max() {
        return false;
    }
    let vt = svd.v_t.unwrap();
    let scale = norm(v).max(1.0);
    let kern = [vt[(imin, 0)], vt[(imin, 1)], vt[(imin, 2)]];
    [1.0, -1.0].iter().any(|&sgn| {
        let probe = [
            v[0] + sgn * PROBE * scale * kern[0],
            v[1] + sgn * PROBE * scale * kern[1],
            v[2] + sgn * PROBE * scale * kern[2],
        ];
        newton(f, &probe).is_some_and(|w| {
            let d = norm(&sub(&w, v));
            d > DEDUPE * scale && d < 0.1 * scale
        })
    })
}

/// Isolated idempotents of `f`, sorted lexicographically.
pub fn find_idempotents(f: &QuadraticField) -> Result<Vec<Idempotent>> {
    find_idempotents_with_seeds(f, &[])
}

/// As [`find_idempotents`], with extra Newton seeds placed after the grid.
pub fn find_idempotents_with_seeds(f: &QuadraticField, extra: &[Vec3]) -> Result<Vec<Idempotent>> {
    let mut seeds = seed_grid();
    seeds.extend_from_slice(extra);
    let mut roots: Vec<Vec3> = seeds.par_iter().filter_map(|s| newton(f, s)).collect();
    roots.sort_by(lex);
    let mut unique: Vec<Vec3> = Vec::new();
    for r in roots {
        if !unique.iter().any(|u| norm(&sub(u, &r)) <= DEDUPE * norm(&r).max(1.0)) {
            unique.push(r);
        }
    }
    unique.sort_by(lex);
    if let Some(v) = unique.iter().find(|v| continuum_at(f, v)) {
        return Err(Error::NonIsolatedSolutionSet { sample: *v });
    }
    Ok(unique
        .into_iter()
        .map(|point| Idempotent {
            point,
            residual: residual(f, &point),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{standard_family, FamilyId};
    use crate::metric::euler_arnold_field;
    use crate::normal_form::{normal_form_form, NormalFormTag};
    use proptest::prelude::*;

    fn field(lambda: f64, tag: NormalFormTag, p: Option<f64>) -> QuadraticField {
        let g = standard_family(FamilyId::H(lambda)).unwrap();
        euler_arnold_field(&g, &normal_form_form(tag, p).unwrap()).unwrap()
    }

    fn points(f: &QuadraticField) -> Vec<Vec3> {
        find_idempotents(f).unwrap().iter().map(|i| i.point).collect()
    }

    fn assert_set(found: &[Vec3], expected: &[Vec3]) {
        assert_eq!(found.len(), expected.len(), "{found:?} vs {expected:?}");
        for e in expected {
            assert!(found.iter().any(|p| norm(&sub(p, e)) < 1e-9), "missing {e:?} in {found:?}");
        }
    }

    #[test]
    fn spec_examples() {
        use NormalFormTag::*;
        assert_set(&points(&field(0.0, Q11, None)), &[[1.0, 0.0, 0.0]]);
        assert_set(&points(&field(0.5, Q1, None)), &[[2.0, 0.0, 2.0], [2.0, 0.0, -2.0]]);
        assert!(points(&field(0.0, Q9, None)).is_empty());
        assert_set(
            &points(&field(1.0 / 3.0, Q3, None)),
            &[[1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [3.0, 0.0, 3.0], [3.0, 0.0, -3.0]],
        );
    }

    #[test]
    fn residuals_meet_the_type_bound() {
        for tag in NormalFormTag::LORENTZIAN {
            let p = tag.has_param().then_some(match tag {
                NormalFormTag::Q6 => 2.0,
                _ => 0.5,
            });
            for imp in find_idempotents(&field(-0.5, tag, p)).unwrap() {
                assert!(imp.residual <= Idempotent::tolerance(&imp.point));
            }
        }
    }

    #[test]
    fn curve_of_idempotents_is_reported() {
        // h(1) with Q1: every point (1, y, z) with z² − y² = 1 is an idempotent.
        let f = field(1.0, NormalFormTag::Q1, None);
        assert!(matches!(find_idempotents(&f), Err(Error::NonIsolatedSolutionSet { .. })));
    }

    #[test]
    fn zero_field_has_none() {
        assert!(find_idempotents(&QuadraticField::zero()).unwrap().is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn scaling_law(lambda in -0.9f64..0.9, mu in 0.3f64..3.0) {
            let f = field(lambda, NormalFormTag::Q2, None);
            let base = points(&f);
            let scaled: Vec<Vec3> = base.iter().map(|v| [v[0] / mu, v[1] / mu, v[2] / mu]).collect();
            let g = f.scaled(mu);
            for v in &scaled {
                prop_assert!(norm(&sub(&g.eval(v), v)) <= Idempotent::tolerance(v));
            }
            let found = points(&g);
            prop_assert_eq!(found.len(), scaled.len());
        }
    }
}
