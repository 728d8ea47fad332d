//! Collapsed Gauss–Jacobi rules on the reference simplex.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub dim: usize,
    /// Barycentric coordinates of each point (`dim + 1` entries).
    pub points: Vec<Vec<f64>>,
    /// Weights summing to the reference simplex volume `1 / dim!`.
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss–Jacobi nodes and weights on [0, 1] for the weight `(1 - t)^alpha`.
fn gauss_jacobi01(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let beta = 0.0;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        let s = 2.0 * k + alpha + beta;
        j[(i, i)] = if i == 0 {
            (beta - alpha) / (alpha + beta + 2.0)
        } else {
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        };
        if i + 1 < n {
            let m = k + 1.0;
            let s = 2.0 * m + alpha + beta;
            let b = (4.0 * m * (m + alpha) * (m + beta) * (m + alpha + beta)
                / (s * s * (s + 1.0) * (s - 1.0)))
                .sqrt();
            j[(i, i + 1)] = b;
            j[(i + 1, i)] = b;
        }
    }
    // mu0 = int_{-1}^{1} (1-x)^alpha dx for integer alpha.
    let mu0 = 2f64.powf(alpha + 1.0) / (alpha + 1.0);
    let eig = SymmetricEigen::new(j);
    let mut pw: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let w = mu0 * eig.eigenvectors[(0, i)].powi(2);
            ((1.0 + x) / 2.0, w / 2f64.powf(alpha + 1.0))
        })
        .collect();
    pw.sort_by(|a, b| a.0.total_cmp(&b.0));
    pw.into_iter().unzip()
}

/// Rule on the reference simplex exact for polynomials of total degree
/// `degree` (at most 10).
pub fn simplex_quadrature(dim: usize, degree: usize) -> Result<QuadratureRule> {
    if degree > 10 {
        return Err(Error::UnsupportedDegree(degree));
    }
    let n = degree / 2 + 1;
    let (x0, w0) = gauss_jacobi01(n, 0.0);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            for (x, w) in x0.iter().zip(&w0) {
                points.push(vec![1.0 - x, *x]);
                weights.push(*w);
            }
        }
        2 => {
            let (x1, w1) = gauss_jacobi01(n, 1.0);
            for (s, ws) in x0.iter().zip(&w0) {
                for (t, wt) in x1.iter().zip(&w1) {
                    let x = s * (1.0 - t);
                    let y = *t;
                    points.push(vec![1.0 - x - y, x, y]);
                    weights.push(ws * wt);
                }
            }
        }
        3 => {
            let (x1, w1) = gauss_jacobi01(n, 1.0);
            let (x2, w2) = gauss_jacobi01(n, 2.0);
            for (r, wr) in x0.iter().zip(&w0) {
                for (s, ws) in x1.iter().zip(&w1) {
                    for (t, wt) in x2.iter().zip(&w2) {
                        let x = r * (1.0 - s) * (1.0 - t);
                        let y = s * (1.0 - t);
                        let z = *t;
                        points.push(vec![1.0 - x - y - z, x, y, z]);
                        weights.push(wr * ws * wt);
                    }
                }
            }
        }
        _ => return Err(Error::InvalidInput(format!("quadrature dimension {dim}"))),
    }
    Ok(QuadratureRule { dim, points, weights, degree })
}
