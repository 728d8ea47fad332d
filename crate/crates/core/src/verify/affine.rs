//! Affine maps of simplices and the covariant and matrix Piola transforms.

use nalgebra::{Matrix3, SVector};
use num_dual::{jacobian, DualNum, DualSVec64};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::tensor::{self, Mat};

/// `F(x) = B x + b` on the first `dim` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub dim: usize,
    pub matrix: Mat,
    pub offset: Point,
    pub det: f64,
}

fn to_na(m: &Mat) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

fn from_na(m: &Matrix3<f64>) -> Mat {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

impl AffineMap {
    pub fn new(dim: usize, matrix: Mat, offset: Point) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension {dim}")));
        }
        let mut b = to_na(&matrix);
        for i in dim..3 {
            b[(i, i)] = 1.0;
        }
        let det = b.determinant();
        let scale = b.norm().powi(dim as i32);
        if det.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidInput("singular affine map".into()));
        }
        Ok(AffineMap { dim, matrix: from_na(&b), offset, det })
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap::new(dim, from_na(&Matrix3::identity()), [0.0; 3]).expect("identity is invertible")
    }

    /// The map sending the reference simplex (origin and unit points) to
    /// the simplex with vertices `pts`.
    pub fn from_simplex(dim: usize, pts: &[Point]) -> Result<Self> {
        let mut b = [[0.0; 3]; 3];
        for j in 0..dim {
            for i in 0..dim {
                b[i][j] = pts[j + 1][i] - pts[0][i];
            }
        }
        AffineMap::new(dim, b, pts[0])
    }

    pub fn apply(&self, x: &Point) -> Point {
        let mut y = tensor::mat_vec(&self.matrix, x);
        for i in 0..3 {
            y[i] += self.offset[i];
        }
        y
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = to_na(&self.matrix).try_inverse().expect("checked at construction");
        let b = -(inv * nalgebra::Vector3::from(self.offset));
        AffineMap { dim: self.dim, matrix: from_na(&inv), offset: [b[0], b[1], b[2]], det: 1.0 / self.det }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let m = to_na(&self.matrix) * to_na(&other.matrix);
        AffineMap { dim: self.dim, matrix: from_na(&m), offset: self.apply(&other.offset), det: self.det * other.det }
    }

    fn inverse_transpose(&self) -> Mat {
        from_na(&to_na(&self.matrix).try_inverse().expect("checked at construction").transpose())
    }
}

/// Covariant transform `v = B^{-T} v_hat`.
pub fn covariant_vector(map: &AffineMap, v_hat: &Point) -> Point {
    tensor::mat_vec(&map.inverse_transpose(), v_hat)
}

/// Matrix Piola transform `tau = B tau_hat B^T` on tensor components.
pub fn piola_stress(map: &AffineMap, tau_hat: &[f64]) -> Vec<f64> {
    let t = tensor::from_components(map.dim, tau_hat);
    let b = to_na(&map.matrix);
    tensor::to_components(map.dim, &from_na(&(b * to_na(&t) * b.transpose())))
}

/// A cubic symmetric tensor field on reference coordinates.
fn tau_hat<D: DualNum<Primitive = f64> + Copy>(x: [D; 3]) -> [[D; 3]; 3] {
    let [a, b, c] = x;
    let s00 = a * a * b + c;
    let s01 = b * c * c - a;
    let s02 = a * b * c;
    let s11 = b * b * b + a * c;
    let s12 = a * a - c * b;
    let s22 = c * c * a + b * b;
    [[s00, s01, s02], [s01, s11, s12], [s02, s12, s22]]
}

/// Row-wise divergence of `x -> map(tau)(x)` where `map` is `B t B^T`
/// applied to `tau_hat(q(x))` and `q` is affine.
fn mapped_divergence(x: &Point, q: &AffineMap, b: &Mat) -> Point {
    let mut div = [0.0; 3];
    for (i, d) in div.iter_mut().enumerate() {
        let (_, jac) = jacobian(
            |p: SVector<DualSVec64<3>, 3>| {
                let y: [DualSVec64<3>; 3] = std::array::from_fn(|r| {
                    (0..3).fold(DualSVec64::from(q.offset[r]), |acc, c| acc + p[c] * q.matrix[r][c])
                });
                let t = tau_hat(y);
                SVector::from(std::array::from_fn::<_, 3, _>(|j| {
                    let mut s = DualSVec64::from(0.0);
                    for a in 0..3 {
                        for c in 0..3 {
                            s += t[a][c] * (b[i][a] * b[j][c]);
                        }
                    }
                    s
                }))
            },
            &SVector::from(*x),
        );
        *d = (0..3).map(|j| jac[(j, j)]).sum();
    }
    div
}

/// Largest relative violation of `div (B tau_hat B^T) = B div_hat tau_hat`
/// over the reference points `x_hat`, for a fixed cubic `tau_hat`.
/// Derivatives are exact (forward-mode dual numbers).
pub fn piola_divergence_residual(map: &AffineMap, x_hat: &[Point]) -> f64 {
    let id = AffineMap::identity(3);
    let finv = map.inverse();
    let mut worst: f64 = 0.0;
    for p in x_hat {
        let div = mapped_divergence(&map.apply(p), &finv, &map.matrix);
        let expected = tensor::mat_vec(&map.matrix, &mapped_divergence(p, &id, &id.matrix));
        for i in 0..3 {
            worst = worst.max((div[i] - expected[i]).abs() / (1.0 + expected[i].abs()));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map3() -> AffineMap {
        AffineMap::new(3, [[1.2, 0.3, -0.1], [0.2, 0.9, 0.4], [-0.3, 0.1, 1.5]], [0.5, -0.2, 0.7]).unwrap()
    }

    #[test]
    fn identity_round_trip() {
        let id = AffineMap::identity(3);
        let v = [0.3, -1.0, 2.0];
        assert_eq!(covariant_vector(&id, &v), v);
        let t = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(piola_stress(&id, &t), t.to_vec());
        let f = map3();
        let g = f.compose(&f.inverse());
        let x = [0.1, 0.2, 0.3];
        let y = g.apply(&x);
        assert!((0..3).all(|i| (y[i] - x[i]).abs() < 1e-13));
        let back = covariant_vector(&f.inverse(), &covariant_vector(&f, &v));
        assert!((0..3).all(|i| (back[i] - v[i]).abs() < 1e-13));
    }

    #[test]
    fn singular_map_is_rejected() {
        assert!(AffineMap::new(2, [[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0; 3]], [0.0; 3]).is_err());
    }

    #[test]
    fn piola_divergence_identity() {
        let f = map3();
        let pts = [[0.1, 0.2, 0.3], [0.7, -0.4, 0.2], [1.1, 0.5, -0.8]];
        assert!(piola_divergence_residual(&f, &pts) < 1e-12);
        let g = AffineMap::new(2, [[2.0, 0.5, 0.0], [-0.3, 0.7, 0.0], [0.0; 3]], [1.0, 1.0, 0.0]).unwrap();
        assert!(piola_divergence_residual(&g, &pts) < 1e-12);
    }

    #[test]
    fn covariant_transform_preserves_rigid_motions() {
        // v_hat = a + W x_hat; v(x) = B^{-T} v_hat(F^{-1} x) has gradient
        // B^{-T} W B^{-1}, which is skew.
        let f = map3();
        let w = [[0.0, 1.0, -2.0], [-1.0, 0.0, 0.5], [2.0, -0.5, 0.0]];
        let bit = to_na(&f.inverse_transpose());
        let g = bit * to_na(&w) * bit.transpose();
        assert!((g + g.transpose()).amax() < 1e-13);
        let v = covariant_vector(&f, &[1.0, 0.0, 0.0]);
        assert!(v.iter().any(|x| *x != 0.0));
    }

    #[test]
    fn piola_preserves_symmetry_and_pairing() {
        // int div tau . v = det B int div_hat tau_hat . v_hat pointwise factor:
        // (B d) . (B^{-T} w) = d . w.
        let f = map3();
        let d = [0.3, -0.7, 1.1];
        let w = [2.0, 0.4, -0.6];
        let lhs = crate::geom::dot(&tensor::mat_vec(&f.matrix, &d), &covariant_vector(&f, &w));
        assert!((lhs - crate::geom::dot(&d, &w)).abs() < 1e-13);
        let t = piola_stress(&f, &[1.0, 2.0, 3.0, 0.5, -0.2, 0.9]);
        assert_eq!(t.len(), 6);
    }
}
