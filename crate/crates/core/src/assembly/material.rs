//! Homogeneous isotropic compliance and stiffness.

use crate::tensor::{frobenius, n_sym, pairs};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub mu: f64,
    pub lambda: f64,
    pub dim: usize,
}

impl Material {
    pub fn new(mu: f64, lambda: f64, dim: usize) -> Self {
        assert!(mu > 0.0 && lambda >= 0.0, "material parameters must be positive");
        Material { mu, lambda, dim }
    }

    fn trace(&self, t: &[f64]) -> f64 {
        (0..self.dim).map(|i| t[i]).sum()
    }

    /// `A tau = (tau - lambda / (2 mu + n lambda) tr(tau) delta) / (2 mu)`.
    pub fn compliance(&self, tau: &[f64]) -> Vec<f64> {
        let tr = self.trace(tau);
        let c = self.lambda / (2.0 * self.mu + self.dim as f64 * self.lambda);
        pairs(self.dim)
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| (tau[k] - if i == j { c * tr } else { 0.0 }) / (2.0 * self.mu))
            .collect()
    }

    /// `sigma = 2 mu eps + lambda tr(eps) delta`.
    pub fn stiffness(&self, eps: &[f64]) -> Vec<f64> {
        let tr = self.trace(eps);
        pairs(self.dim)
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| 2.0 * self.mu * eps[k] + if i == j { self.lambda * tr } else { 0.0 })
            .collect()
    }

    /// Gram matrix of the compliance pairing on component unit tensors:
    /// `G[a][b] = (A E_b) : E_a`.
    pub fn compliance_gram(&self) -> Vec<Vec<f64>> {
        let n = n_sym(self.dim);
        let mut g = vec![vec![0.0; n]; n];
        for b in 0..n {
            let mut e = vec![0.0; n];
            e[b] = 1.0;
            let ae = self.compliance(&e);
            for a in 0..n {
                let mut ea = vec![0.0; n];
                ea[a] = 1.0;
                g[a][b] = frobenius(self.dim, &ae, &ea);
            }
        }
        g
    }
}
