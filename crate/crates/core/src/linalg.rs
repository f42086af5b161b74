//! Fixed-size 3×3 helpers. Everything here is row-major: `m[row][col]`.

use nalgebra::{Matrix3, SymmetricEigen};
use num::{BigRational, Num, Zero};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type Tensor3 = [[[f64; 3]; 3]; 3];

pub type QVec3 = [BigRational; 3];
pub type QMat3 = [[BigRational; 3]; 3];
pub type QTensor3 = [[[BigRational; 3]; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
pub const ZERO_MAT: Mat3 = [[0.0; 3]; 3];

pub fn basis(i: usize) -> Vec3 {
    let mut e = [0.0; 3];
    e[i] = 1.0;
    e
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &Vec3) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut t = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat_scale(a: &Mat3, s: f64) -> Mat3 {
    let mut c = *a;
    c.iter_mut().flatten().for_each(|x| *x *= s);
    c
}

pub fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = *a;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] -= b[i][j];
        }
    }
    c
}

/// `aᵀ · m · a`, the congruence action.
pub fn congruence(m: &Mat3, a: &Mat3) -> Mat3 {
    mat_mul(&transpose(a), &mat_mul(m, a))
}

pub fn frobenius(m: &Mat3) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn is_symmetric(m: &Mat3) -> bool {
    m[0][1] == m[1][0] && m[0][2] == m[2][0] && m[1][2] == m[2][1]
}

pub fn det<T: Clone + Num>(m: &[[T; 3]; 3]) -> T {
    let c = |i: usize, j: usize| m[i][j].clone();
    c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
        + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0))
}

/// Adjugate inverse; exact for rational entries. `None` when the determinant is exactly zero.
pub fn inverse_exact<T: Clone + Num>(m: &[[T; 3]; 3]) -> Option<[[T; 3]; 3]> {
    let d = det(m);
    if d.is_zero() {
        return None;
    }
    let c = |i: usize, j: usize| m[i][j].clone();
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| c(r0, c0) * c(r1, c1) - c(r0, c1) * c(r1, c0);
    let adj = [
        [cof(1, 2, 1, 2), cof(0, 2, 2, 1), cof(0, 1, 1, 2)],
        [cof(1, 2, 2, 0), cof(0, 2, 0, 2), cof(0, 1, 2, 0)],
        [cof(1, 2, 0, 1), cof(0, 2, 1, 0), cof(0, 1, 0, 1)],
    ];
    Some(adj.map(|row| row.map(|x| x / d.clone())))
}

/// Floating-point inverse, rejecting matrices whose determinant is negligible
/// against the product of row norms.
pub fn inverse(m: &Mat3) -> Option<Mat3> {
    let d = det(m);
    let scale = m.iter().map(norm).product::<f64>();
    if !d.is_finite() || d.abs() <= 1e-14 * scale || scale == 0.0 {
        return None;
    }
    inverse_exact(m)
}

pub fn to_na(m: &Mat3) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

pub fn from_na(m: &Matrix3<f64>) -> Mat3 {
    let mut out = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[(i, j)];
        }
    }
    out
}

/// Eigenvalues (ascending) and matching unit eigenvectors (as columns) of a symmetric matrix.
pub fn sym_eigen(m: &Mat3) -> ([f64; 3], Mat3) {
    let eig = SymmetricEigen::new(to_na(m));
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vals = [0.0; 3];
    let mut vecs = ZERO_MAT;
    for (col, &k) in idx.iter().enumerate() {
        vals[col] = eig.eigenvalues[k];
        for row in 0..3 {
            vecs[row][col] = eig.eigenvectors[(row, k)];
        }
    }
    (vals, vecs)
}

/// Eigen-decomposition of a symmetric 2×2 matrix `[[a, b], [b, c]]`:
/// eigenvalues ascending, eigenvectors as columns.
pub fn sym_eigen2(a: f64, b: f64, c: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mean = 0.5 * (a + c);
    let half = 0.5 * (a - c);
    let rad = half.hypot(b);
    let (lo, hi) = (mean - rad, mean + rad);
    // eigenvector for `hi`
    let (vx, vy) = if b == 0.0 {
        if a >= c {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let (x, y) = if half >= 0.0 { (half + rad, b) } else { (b, rad - half) };
        let n = x.hypot(y);
        (x / n, y / n)
    };
    ([lo, hi], [[-vy, vx], [vx, vy]])
}

pub fn qzero() -> BigRational {
    BigRational::zero()
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn q_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn q_to_f64(x: &BigRational) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn qmat_from_f64(m: &Mat3) -> QMat3 {
    m.map(|row| row.map(q_from_f64))
}

pub fn qmat_to_f64(m: &QMat3) -> Mat3 {
    let mut out = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = q_to_f64(&m[i][j]);
        }
    }
    out
}
