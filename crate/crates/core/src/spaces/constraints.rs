//! Linear functionals on symmetric tensors in Mandel coordinates, used to
//! assemble node-local constraint systems.

use nalgebra::DMatrix;

use crate::geom::Point;
use crate::tensor::{n_sym, pairs};

/// Row `r` with `r . m = a^T tau b` for Mandel coordinates `m` of `tau`.
pub fn bilinear_row(dim: usize, a: &Point, b: &Point) -> Vec<f64> {
    pairs(dim)
        .iter()
        .map(|&(i, j)| {
            if i == j {
                a[i] * b[i]
            } else {
                (a[i] * b[j] + a[j] * b[i]) / std::f64::consts::SQRT_2
            }
        })
        .collect()
}

/// Rows of the traction functional `tau v`.
pub fn traction_rows(dim: usize, v: &Point) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            bilinear_row(dim, &e, v)
        })
        .collect()
}

/// Accumulates constraint rows over a block vector of `blocks` tensors.
pub struct Constraints {
    ns: usize,
    blocks: usize,
    rows: Vec<Vec<f64>>,
}

impl Constraints {
    pub fn new(dim: usize, blocks: usize) -> Self {
        Constraints { ns: n_sym(dim), blocks, rows: Vec::new() }
    }

    /// Adds `sum_k coef_k * (row . m_{block_k})` as one constraint.
    pub fn add(&mut self, terms: &[(usize, f64, &[f64])]) {
        let mut r = vec![0.0; self.ns * self.blocks];
        for &(block, coef, row) in terms {
            for (c, v) in row.iter().enumerate() {
                r[block * self.ns + c] += coef * v;
            }
        }
        self.rows.push(r);
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.ns * self.blocks;
        DMatrix::from_fn(self.rows.len(), n, |i, j| self.rows[i][j])
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{from_components, from_mandel, mat_vec};

    #[test]
    fn bilinear_matches_matrix_product() {
        let m = [0.3, -1.2, 0.7, 0.4, -0.5, 0.9];
        let tau = from_components(3, &from_mandel(3, &m));
        let a = [0.2, -0.3, 0.8];
        let b = [1.0, 0.5, -0.25];
        let direct: f64 = (0..3).map(|i| a[i] * mat_vec(&tau, &b)[i]).sum();
        let r = bilinear_row(3, &a, &b);
        let via: f64 = r.iter().zip(&m).map(|(x, y)| x * y).sum();
        assert!((direct - via).abs() < 1e-14);
    }
}
