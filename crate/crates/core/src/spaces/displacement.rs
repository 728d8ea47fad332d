//! Discontinuous piecewise P_{k-1} vector fields.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::poly::LagrangeBasis;

#[derive(Clone, Debug)]
pub struct DisplacementSpace {
    pub dim: usize,
    /// Polynomial degree of the displacement (k - 1).
    pub degree: usize,
    pub basis: LagrangeBasis,
    pub n_cells: usize,
}

impl DisplacementSpace {
    /// Displacements paired with degree-`k` stresses.
    pub fn new(mesh: &Mesh, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::UnsupportedDegree(k));
        }
        Ok(DisplacementSpace {
            dim: mesh.dim,
            degree: k - 1,
            basis: LagrangeBasis::new(mesh.dim, k - 1)?,
            n_cells: mesh.n_cells(),
        })
    }

    /// Scalar basis functions per cell.
    pub fn n_local(&self) -> usize {
        self.basis.len()
    }

    /// Degrees of freedom per cell.
    pub fn block(&self) -> usize {
        self.n_local() * self.dim
    }

    pub fn n_dofs(&self) -> usize {
        self.n_cells * self.block()
    }

    pub fn dof(&self, cell: usize, node: usize, comp: usize) -> usize {
        (cell * self.n_local() + node) * self.dim + comp
    }

    pub fn eval(&self, coef: &[f64], cell: usize, lam: &[f64]) -> [f64; 3] {
        let phi = self.basis.values(lam);
        let mut u = [0.0; 3];
        for (a, p) in phi.iter().enumerate() {
            for (i, ui) in u.iter_mut().enumerate().take(self.dim) {
                *ui += coef[self.dof(cell, a, i)] * p;
            }
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_square_mesh, macro_split_2d};

    #[test]
    fn counts() {
        let mm = macro_split_2d(&unit_square_mesh(1)).unwrap();
        assert_eq!(DisplacementSpace::new(&mm.fine, 2).unwrap().n_dofs(), 48);
        let ref_tet = Mesh::new(
            3,
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let p3 = crate::mesh::macro_split_3d_p3(&ref_tet).unwrap();
        assert_eq!(DisplacementSpace::new(&p3.fine, 3).unwrap().n_dofs(), 120);
        let p2 = crate::mesh::macro_split_3d_p2(&ref_tet).unwrap();
        assert_eq!(DisplacementSpace::new(&p2.fine, 2).unwrap().n_dofs(), 144);
    }
}
