use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{cross, dot, mat_vec, norm, scale, Mat3, Vec3, ZERO_MAT};
use crate::metric::QuadraticField;

/// A plane through the origin, `{v : n·v = 0}`, mapped into itself by the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantPlane {
    pub normal: Vec3,
    pub residual: f64,
}

/// Raised when the normals fill a curve instead of a finite set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuumFlag {
    /// Unit vector orthogonal to the best-fit great circle through the normals.
    pub axis: Vec3,
    /// RMS distance of the normals from that great circle.
    pub fit_residual: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantPlanes {
    pub planes: Vec<InvariantPlane>,
    pub continuum: Option<ContinuumFlag>,
}

const SEEDS: usize = 800;
const MAX_ITER: usize = 100;
const ACCEPT: f64 = 1e-10;
// Degenerate planes converge slowly, so near-coincident normals are merged generously.
const SAME: f64 = 1e-6;
const SNAP: f64 = 1e-2;
const CONTINUUM_COUNT: usize = 24;

/// `M(n) = Σ n_i B_i`, the matrix of the quadratic form `v ↦ n·F(v)`.
fn form_of(f: &QuadraticField, n: &Vec3) -> Mat3 {
    let b = f.tensor();
    let mut m = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m[j][k] += n[i] * b[i][j][k];
            }
        }
    }
    m
}

/// Orthonormal basis of the plane orthogonal to the unit vector `n`.
fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let pick = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let u = cross(n, &pick);
    let u = scale(&u, 1.0 / norm(&u));
    let w = cross(n, &u);
    (u, w)
}

/// The three coefficients of `n·F` restricted to `n⊥`.
pub fn restricted_coefficients(f: &QuadraticField, n: &Vec3) -> [f64; 3] {
    let n = scale(n, 1.0 / norm(n));
    let m = form_of(f, &n);
    let (u, w) = plane_basis(&n);
    let mu = mat_vec(&m, &u);
    [dot(&u, &mu), 2.0 * dot(&w, &mu), dot(&w, &mat_vec(&m, &w))]
}

/// Basis-free residual `P M(n) P` with `P = I − n nᵀ`.
fn projected(f: &QuadraticField, n: &Vec3) -> [f64; 9] {
    let m = form_of(f, n);
    let mut p = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            p[i][j] = if i == j { 1.0 } else { 0.0 } - n[i] * n[j];
        }
    }
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += p[i][a] * m[a][b] * p[b][j];
                }
            }
            out[3 * i + j] = s;
        }
    }
    out
}

fn sq(r: &[f64; 9]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn normalize(n: &Vec3) -> Vec3 {
    scale(n, 1.0 / norm(n))
}

fn sign_normalized(n: &Vec3) -> Vec3 {
    let first = n.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
    if first < 0.0 {
        scale(n, -1.0)
    } else {
        *n
    }
}

/// Levenberg–Marquardt on the sphere, in tangent coordinates re-centred every iteration.
fn refine(f: &QuadraticField, seed: &Vec3) -> Vec3 {
    let mut n = normalize(seed);
    let mut r = projected(f, &n);
    let mut mu = 1e-3;
    let h = 1e-7;
    for _ in 0..MAX_ITER {
        let cost = sq(&r);
        if cost == 0.0 {
            break;
        }
        let (u, w) = plane_basis(&n);
        let at = |a: f64, b: f64| normalize(&[n[0] + a * u[0] + b * w[0], n[1] + a * u[1] + b * w[1], n[2] + a * u[2] + b * w[2]]);
        let ra = projected(f, &at(h, 0.0));
        let rb = projected(f, &at(0.0, h));
        let ja: Vec<f64> = (0..9).map(|k| (ra[k] - r[k]) / h).collect();
        let jb: Vec<f64> = (0..9).map(|k| (rb[k] - r[k]) / h).collect();
        let (mut aa, mut ab, mut bb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..9 {
            aa += ja[k] * ja[k];
            ab += ja[k] * jb[k];
            bb += jb[k] * jb[k];
            ga += ja[k] * r[k];
            gb += jb[k] * r[k];
        }
        let mut accepted = false;
        for _ in 0..20 {
            let (a11, a22) = (aa + mu * aa.max(1e-30), bb + mu * bb.max(1e-30));
            let det = a11 * a22 - ab * ab;
            if det.abs() < 1e-300 {
                mu *= 10.0;
                continue;
            }
            let da = -(a22 * ga - ab * gb) / det;
            let db = -(a11 * gb - ab * ga) / det;
            let cand = at(da, db);
            let rc = projected(f, &cand);
            if sq(&rc) < cost {
                let step = da.hypot(db);
                n = cand;
                r = rc;
                mu = (mu * 0.3).max(1e-12);
                accepted = true;
                if step < 1e-15 {
                    return n;
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    n
}

/// Fibonacci points on the upper hemisphere.
fn hemisphere(count: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

/// Zeroes tiny components when that does not increase the residual.
fn snapped(f: &QuadraticField, n: &Vec3) -> Vec3 {
    let big = n.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let cand = n.map(|x| if x.abs() < SNAP * big { 0.0 } else { x });
    if cand == *n {
        return *n;
    }
    let cand = normalize(&cand);
    if plane_residual(f, &cand) <= plane_residual(f, n) {
        cand
    } else {
        *n
    }
}

pub fn plane_residual(f: &QuadraticField, n: &Vec3) -> f64 {
    restricted_coefficients(f, n).iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Invariant planes through the origin, sign-normalized and sorted.
pub fn find_invariant_planes(f: &QuadraticField) -> InvariantPlanes {
    let tol = ACCEPT * f.max_coefficient().max(1.0);
    let mut seeds = hemisphere(SEEDS);
    seeds.extend([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let mut found: Vec<(Vec3, f64)> = Vec::new();
    for s in &seeds {
        let n = snapped(f, &refine(f, s));
        let r = plane_residual(f, &n);
        if r > tol {
            continue;
        }
        let n = sign_normalized(&n);
        match found.iter_mut().find(|(m, _)| dot(m, &n).abs() > 1.0 - SAME) {
            Some(entry) if r < entry.1 => *entry = (n, r),
            Some(_) => {}
            None => found.push((n, r)),
        }
    }
    let mut normals: Vec<Vec3> = found.into_iter().map(|(n, _)| n).collect();
    normals.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2])));
    let continuum = (normals.len() > CONTINUUM_COUNT).then(|| {
        let m = DMatrix::from_fn(normals.len(), 3, |i, j| normals[i][j]);
        let svd = m.svd(false, true);
        let (imin, smin) = svd.singular_values.argmin();
        let vt = svd.v_t.unwrap();
        let axis = sign_normalized(&[vt[(imin, 0)], vt[(imin, 1)], vt[(imin, 2)]]);
        ContinuumFlag {
            axis,
            fit_residual: smin / (normals.len() as f64).sqrt(),
            count: normals.len(),
        }
    });
    InvariantPlanes {
        planes: normals
            .into_iter()
            .map(|normal| InvariantPlane {
                normal,
                residual: plane_residual(f, &normal),
            })
            .collect(),
        continuum,
    }
}
