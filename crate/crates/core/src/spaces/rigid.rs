//! Rigid motions and their L^2 complement in discontinuous vector fields.

use nalgebra::DMatrix;

use crate::assembly::forms::RefTables;
use crate::geom::Point;
use crate::mesh::Mesh;
use crate::poly::LagrangeBasis;
use crate::solver::dense::gram_orthonormalize;

/// Basis `e_i` and `x_j e_i - x_i e_j` of the rigid motions.
#[derive(Clone, Debug)]
pub struct RigidMotionBasis {
    pub dim: usize,
    /// Each member is `v(x) = a + W x` with `W` skew.
    pub members: Vec<([f64; 3], [[f64; 3]; 3])>,
}

impl RigidMotionBasis {
    pub fn new(dim: usize) -> Self {
        let mut members = Vec::new();
        for i in 0..dim {
            let mut a = [0.0; 3];
            a[i] = 1.0;
            members.push((a, [[0.0; 3]; 3]));
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let mut w = [[0.0; 3]; 3];
                w[i][j] = 1.0;
                w[j][i] = -1.0;
                members.push(([0.0; 3], w));
            }
        }
        RigidMotionBasis { dim, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn eval(&self, k: usize, x: &Point) -> [f64; 3] {
        let (a, w) = &self.members[k];
        let mut v = *a;
        for i in 0..3 {
            for j in 0..3 {
                v[i] += w[i][j] * x[j];
            }
        }
        v
    }

    /// Constant gradient `dv_i/dx_j` of member `k`.
    pub fn gradient(&self, k: usize) -> [[f64; 3]; 3] {
        self.members[k].1
    }
}

/// Discontinuous P_{k-1} vector fields on a set of cells, in the nodal
/// layout `(cell, node, component)`.
#[derive(Clone, Debug)]
pub struct CellVectorBasis {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub basis: LagrangeBasis,
}

impl CellVectorBasis {
    pub fn new(dim: usize, degree: usize, cells: Vec<usize>) -> Self {
        CellVectorBasis { dim, cells, basis: LagrangeBasis::new(dim, degree).expect("supported degree") }
    }

    pub fn len(&self) -> usize {
        self.cells.len() * self.basis.len() * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, cell_pos: usize, node: usize, comp: usize) -> usize {
        (cell_pos * self.basis.len() + node) * self.dim + comp
    }

    /// L^2 Gram matrix.
    pub fn gram(&self, mesh: &Mesh, tables: &RefTables) -> DMatrix<f64> {
        let n = self.len();
        let nl = self.basis.len();
        let mut g = DMatrix::zeros(n, n);
        for (p, &c) in self.cells.iter().enumerate() {
            let vol = mesh.volume(c);
            for a in 0..nl {
                for b in 0..nl {
                    for i in 0..self.dim {
                        g[(self.index(p, a, i), self.index(p, b, i))] = vol * tables.vmass[(a, b)];
                    }
                }
            }
        }
        g
    }

    /// Coefficients (columns) of the rigid motions interpolated on the
    /// cells; exact because rigid motions are linear.
    pub fn rigid_motions(&self, mesh: &Mesh) -> DMatrix<f64> {
        let rm = RigidMotionBasis::new(self.dim);
        let mut m = DMatrix::zeros(self.len(), rm.len());
        for (p, &c) in self.cells.iter().enumerate() {
            let pts = mesh.cell_points(c);
            for a in 0..self.basis.len() {
                let x = crate::geom::from_barycentric(&pts, &self.basis.node_bary(a));
                for k in 0..rm.len() {
                    let v = rm.eval(k, &x);
                    for i in 0..self.dim {
                        m[(self.index(p, a, i), k)] = v[i];
                    }
                }
            }
        }
        m
    }
}

/// L^2-orthonormal basis (columns, in `vb` coefficients) of the complement
/// of the rigid motions in `vb`.
pub fn rm_perp_basis(mesh: &Mesh, vb: &CellVectorBasis, tables: &RefTables) -> DMatrix<f64> {
    let g = vb.gram(mesh, tables);
    let r = vb.rigid_motions(mesh);
    // Orthonormalize the rigid motions, then project them out of the
    // G-orthonormal basis of the whole space.
    let rg = r.transpose() * &g * &r;
    let rc = &r * gram_orthonormalize(&rg, 1e-12);
    let full = gram_orthonormalize(&g, 1e-14);
    let proj = &full - &rc * (rc.transpose() * &g * &full);
    let pg = proj.transpose() * &g * &proj;
    &proj * gram_orthonormalize(&pg, 1e-8)
}
