//! Piecewise polynomials stored by nodal values on each cell.

use nalgebra::DMatrix;

use crate::assembly::RefTables;
use crate::geom::Point;
use crate::mesh::Mesh;
use crate::poly::LagrangeBasis;
use crate::tensor::{self, n_sym};

/// A piecewise polynomial of degree `degree` on `cells`, with `ncomp`
/// components. Symmetric tensors use `ncomp = n_sym(dim)` and the component
/// order of [`crate::tensor`].
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePoly {
    pub dim: usize,
    pub degree: usize,
    pub ncomp: usize,
    pub cells: Vec<usize>,
    /// `values[j][l * ncomp + c]`: component `c` at Lagrange node `l` of `cells[j]`.
    pub values: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    pub fn zeros(dim: usize, degree: usize, ncomp: usize, cells: Vec<usize>) -> Self {
        let nl = LagrangeBasis::count(dim, degree);
        let values = vec![vec![0.0; nl * ncomp]; cells.len()];
        PiecewisePoly { dim, degree, ncomp, cells, values }
    }

    pub fn is_tensor(&self) -> bool {
        self.ncomp == n_sym(self.dim) && self.ncomp > 1
    }

    /// Position of mesh cell `c` in `cells`.
    pub fn position(&self, c: usize) -> Option<usize> {
        self.cells.iter().position(|&x| x == c)
    }

    pub fn node_value(&self, j: usize, l: usize) -> &[f64] {
        &self.values[j][l * self.ncomp..(l + 1) * self.ncomp]
    }

    pub fn set_node_value(&mut self, j: usize, l: usize, v: &[f64]) {
        self.values[j][l * self.ncomp..(l + 1) * self.ncomp].copy_from_slice(v);
    }

    pub fn eval(&self, basis: &LagrangeBasis, j: usize, lam: &[f64]) -> Vec<f64> {
        let phi = basis.values(lam);
        let mut out = vec![0.0; self.ncomp];
        for (l, p) in phi.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(self.node_value(j, l)) {
                *o += p * v;
            }
        }
        out
    }

    /// Gradients of every component on cell `j`.
    pub fn gradient(&self, basis: &LagrangeBasis, j: usize, lam: &[f64], grads: &[Point]) -> Vec<Point> {
        let dphi = basis.gradients(lam, grads);
        let mut out = vec![[0.0; 3]; self.ncomp];
        for (l, g) in dphi.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(self.node_value(j, l)) {
                for k in 0..3 {
                    o[k] += v * g[k];
                }
            }
        }
        out
    }

    /// Row-wise divergence of a tensor field on cell `j`.
    pub fn divergence(&self, basis: &LagrangeBasis, j: usize, lam: &[f64], grads: &[Point]) -> Point {
        assert!(self.is_tensor(), "divergence needs a symmetric tensor field");
        let dphi = basis.gradients(lam, grads);
        let mut out = [0.0; 3];
        for (l, g) in dphi.iter().enumerate() {
            let t = tensor::from_components(self.dim, self.node_value(j, l));
            let v = tensor::mat_vec(&t, g);
            for k in 0..3 {
                out[k] += v[k];
            }
        }
        out
    }

    /// `self += a * other` (same cell list).
    pub fn axpy(&mut self, a: f64, other: &PiecewisePoly) {
        assert_eq!(self.cells, other.cells);
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            for (p, q) in x.iter_mut().zip(y) {
                *p += a * q;
            }
        }
    }

    /// Linear combination `sum_i coef[i] * polys[i]`.
    pub fn combine(polys: &[PiecewisePoly], coef: &[f64]) -> PiecewisePoly {
        let p0 = &polys[0];
        let mut out = PiecewisePoly::zeros(p0.dim, p0.degree, p0.ncomp, p0.cells.clone());
        for (p, &c) in polys.iter().zip(coef) {
            if c != 0.0 {
                out.axpy(c, p);
            }
        }
        out
    }

    /// Moments `int_K div(self) . chi_m e_i` on cell `j`, laid out as
    /// `m * dim + i` with `chi_m` the degree-`k-1` Lagrange basis of `tables`.
    pub fn div_moments(&self, mesh: &Mesh, tables: &RefTables, j: usize) -> Vec<f64> {
        let dim = self.dim;
        let c = self.cells[j];
        let vol = mesh.volume(c);
        let grads = mesh.bary_gradients(c);
        let nl = tables.disp.len();
        let mut out = vec![0.0; nl * dim];
        for l in 0..tables.stress.len() {
            let t = tensor::from_components(dim, self.node_value(j, l));
            if self.node_value(j, l).iter().all(|v| *v == 0.0) {
                continue;
            }
            for (a, g) in grads.iter().enumerate() {
                let tg = tensor::mat_vec(&t, g);
                for m in 0..nl {
                    let s = vol * tables.div_entry(m, l, a);
                    for i in 0..dim {
                        out[m * dim + i] += s * tg[i];
                    }
                }
            }
        }
        out
    }
}

/// L^2 Gram matrix of fields sharing one cell list; tensor fields use the
/// Frobenius pairing.
pub fn l2_gram(polys: &[PiecewisePoly], mesh: &Mesh, smass: &DMatrix<f64>) -> DMatrix<f64> {
    let n = polys.len();
    let mut g = DMatrix::zeros(n, n);
    if n == 0 {
        return g;
    }
    let p0 = &polys[0];
    let nc = p0.ncomp;
    let w: Vec<f64> = if p0.is_tensor() { (0..nc).map(|k| tensor::weight(p0.dim, k)).collect() } else { vec![1.0; nc] };
    let nl = smass.nrows();
    // Local metric: smass (x) diag(w).
    let metric = DMatrix::from_fn(nl * nc, nl * nc, |r, s| if r % nc == s % nc { smass[(r / nc, s / nc)] * w[r % nc] } else { 0.0 });
    for (j, &c) in p0.cells.iter().enumerate() {
        let x = DMatrix::from_fn(n, nl * nc, |a, r| polys[a].values[j][r]);
        g += (&x * &metric * x.transpose()) * mesh.volume(c);
    }
    g
}

/// Replaces a spanning set by an L^2-orthonormal basis of its span.
pub fn orthonormalize(polys: &[PiecewisePoly], mesh: &Mesh, smass: &DMatrix<f64>, rel_tol: f64) -> Vec<PiecewisePoly> {
    if polys.is_empty() {
        return Vec::new();
    }
    let g = l2_gram(polys, mesh, smass);
    let c = crate::solver::dense::gram_orthonormalize(&g, rel_tol);
    (0..c.ncols())
        .map(|k| PiecewisePoly::combine(polys, c.column(k).as_slice()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::RefTables;

    fn tri() -> Mesh {
        Mesh::new(2, vec![[0.0; 3], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn constant_tensor_has_zero_divergence_and_unit_norm() {
        let mesh = tri();
        let tables = RefTables::new(2, 2).unwrap();
        let mut p = PiecewisePoly::zeros(2, 2, 3, vec![0]);
        for l in 0..6 {
            p.set_node_value(0, l, &[1.0, 0.0, 0.0]);
        }
        let v = p.eval(&tables.stress, 0, &[0.2, 0.3, 0.5]);
        assert!((v[0] - 1.0).abs() < 1e-14);
        let grads = mesh.bary_gradients(0);
        let d = p.divergence(&tables.stress, 0, &[0.2, 0.3, 0.5], &grads);
        assert!(d.iter().all(|x| x.abs() < 1e-13));
        assert!(p.div_moments(&mesh, &tables, 0).iter().all(|x| x.abs() < 1e-13));
        let g = l2_gram(&[p], &mesh, &tables.smass);
        assert!((g[(0, 0)] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn orthonormalize_drops_dependent_members() {
        let mesh = tri();
        let tables = RefTables::new(2, 2).unwrap();
        let mut a = PiecewisePoly::zeros(2, 2, 3, vec![0]);
        a.set_node_value(0, 3, &[1.0, 2.0, 0.5]);
        let mut b = PiecewisePoly::zeros(2, 2, 3, vec![0]);
        b.set_node_value(0, 1, &[0.0, 1.0, 1.0]);
        let mut c = a.clone();
        c.axpy(-3.0, &b);
        let q = orthonormalize(&[a, b, c], &mesh, &tables.smass, 1e-10);
        assert_eq!(q.len(), 2);
        let g = l2_gram(&q, &mesh, &tables.smass);
        assert!((g - DMatrix::identity(2, 2)).amax() < 1e-12);
    }
}
