//! Symmetric tensors stored by independent components.
//!
//! Component order is `(00, 11, 01)` in 2D and `(00, 11, 22, 12, 02, 01)` in 3D.
//! Frobenius pairings weight off-diagonal components by 2.

pub type Mat = [[f64; 3]; 3];

const PAIRS_2D: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];
const PAIRS_3D: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

pub fn n_sym(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

pub fn pairs(dim: usize) -> &'static [(usize, usize)] {
    match dim {
        2 => &PAIRS_2D,
        3 => &PAIRS_3D,
        _ => panic!("dimension {dim} unsupported"),
    }
}

/// Metric weight of component `c` in the Frobenius pairing.
pub fn weight(dim: usize, c: usize) -> f64 {
    let (i, j) = pairs(dim)[c];
    if i == j {
        1.0
    } else {
        2.0
    }
}

/// Unit tensor of component `c`: `e_i e_i^T` or `e_i e_j^T + e_j e_i^T`.
pub fn unit(dim: usize, c: usize) -> Mat {
    let (i, j) = pairs(dim)[c];
    let mut m = [[0.0; 3]; 3];
    m[i][j] = 1.0;
    m[j][i] = 1.0;
    m
}

pub fn to_components(dim: usize, m: &Mat) -> Vec<f64> {
    pairs(dim).iter().map(|&(i, j)| 0.5 * (m[i][j] + m[j][i])).collect()
}

pub fn from_components(dim: usize, c: &[f64]) -> Mat {
    let mut m = [[0.0; 3]; 3];
    for (k, &(i, j)) in pairs(dim).iter().enumerate() {
        m[i][j] = c[k];
        m[j][i] = c[k];
    }
    m
}

pub fn frobenius(dim: usize, a: &[f64], b: &[f64]) -> f64 {
    (0..n_sym(dim)).map(|c| weight(dim, c) * a[c] * b[c]).sum()
}

/// Orthonormal coordinates (off-diagonals scaled by sqrt 2), so that the
/// Euclidean product equals the Frobenius product.
pub fn to_mandel(dim: usize, c: &[f64]) -> Vec<f64> {
    (0..n_sym(dim)).map(|k| c[k] * weight(dim, k).sqrt()).collect()
}

pub fn from_mandel(dim: usize, c: &[f64]) -> Vec<f64> {
    (0..n_sym(dim)).map(|k| c[k] / weight(dim, k).sqrt()).collect()
}

/// `a b^T + b a^T`.
pub fn sym_outer(a: &[f64; 3], b: &[f64; 3]) -> Mat {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j] + b[i] * a[j];
        }
    }
    m
}

pub fn outer(a: &[f64; 3], b: &[f64; 3]) -> Mat {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

pub fn mat_vec(m: &Mat, v: &[f64; 3]) -> [f64; 3] {
    let mut r = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i] += m[i][j] * v[j];
        }
    }
    r
}

/// Components of the symmetric tensor applied to a vector: `(tau v)_i`.
pub fn apply(dim: usize, c: &[f64], v: &[f64; 3]) -> [f64; 3] {
    mat_vec(&from_components(dim, c), v)
}
