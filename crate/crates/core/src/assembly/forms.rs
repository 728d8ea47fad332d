//! Mass, divergence and load assembly.

use nalgebra::DMatrix;

use super::material::Material;
use super::quadrature::simplex_quadrature;
use super::sparse::CsrMatrix;
use crate::error::Result;
use crate::geom::{self, Point};
use crate::mesh::Mesh;
use crate::poly::LagrangeBasis;
use crate::spaces::{DisplacementSpace, StressSpace};
use crate::tensor::{self, n_sym};

/// Reference integrals, normalized by the simplex volume, for degree-`k`
/// stresses and degree-`k-1` displacements.
#[derive(Clone, Debug)]
pub struct RefTables {
    pub dim: usize,
    pub k: usize,
    pub stress: LagrangeBasis,
    pub disp: LagrangeBasis,
    /// `int Phi_a Phi_b / |K|`.
    pub smass: DMatrix<f64>,
    /// `int chi_m chi_n / |K|`.
    pub vmass: DMatrix<f64>,
    /// `int chi_m dPhi_a/dlambda_l / |K|`, indexed `[(m * n_a + a) * (dim+1) + l]`.
    pub div: Vec<f64>,
}

impl RefTables {
    pub fn new(dim: usize, k: usize) -> Result<Self> {
        let stress = LagrangeBasis::new(dim, k)?;
        let disp = LagrangeBasis::new(dim, k - 1)?;
        let (ns, nv) = (stress.len(), disp.len());
        let smass = DMatrix::from_fn(ns, ns, |a, b| stress.polys[a].mul(&stress.polys[b]).integrate(1.0));
        let vmass = DMatrix::from_fn(nv, nv, |a, b| disp.polys[a].mul(&disp.polys[b]).integrate(1.0));
        let mut div = vec![0.0; nv * ns * (dim + 1)];
        for m in 0..nv {
            for a in 0..ns {
                for l in 0..=dim {
                    div[(m * ns + a) * (dim + 1) + l] = disp.polys[m].mul(&stress.d1[a][l]).integrate(1.0);
                }
            }
        }
        Ok(RefTables { dim, k, stress, disp, smass, vmass, div })
    }

    pub fn div_entry(&self, m: usize, a: usize, l: usize) -> f64 {
        self.div[(m * self.stress.len() + a) * (self.dim + 1) + l]
    }
}

/// Dofs of cell `c` and the local compliance mass matrix.
pub fn local_mass(space: &StressSpace, mesh: &Mesh, tables: &RefTables, gram: &[Vec<f64>], c: usize) -> (Vec<usize>, DMatrix<f64>) {
    let ns = n_sym(space.dim);
    let dofs = &space.cell_dofs[c];
    let vol = mesh.volume(c);
    let aw: Vec<Vec<f64>> = dofs
        .iter()
        .map(|d| (0..ns).map(|a| (0..ns).map(|b| gram[a][b] * d.tensor[b]).sum()).collect())
        .collect();
    let e = dofs.len();
    let m = DMatrix::from_fn(e, e, |i, j| {
        let w: f64 = (0..ns).map(|a| dofs[i].tensor[a] * aw[j][a]).sum();
        vol * tables.smass[(dofs[i].local, dofs[j].local)] * w
    });
    (dofs.iter().map(|d| d.dof).collect(), m)
}

/// Dofs of cell `c` and the local divergence matrix; rows follow the
/// displacement layout `(node, component)` of the cell.
pub fn local_div(space: &StressSpace, disp: &DisplacementSpace, mesh: &Mesh, tables: &RefTables, c: usize) -> (Vec<usize>, DMatrix<f64>) {
    let dim = space.dim;
    let ns = n_sym(dim);
    let dofs = &space.cell_dofs[c];
    let vol = mesh.volume(c);
    let grads = mesh.bary_gradients(c);
    // (T grad lambda_l) for every local dof.
    let tg: Vec<Vec<[f64; 3]>> = dofs
        .iter()
        .map(|d| {
            let t = tensor::from_components(dim, &d.tensor[..ns]);
            grads.iter().map(|g| tensor::mat_vec(&t, g)).collect()
        })
        .collect();
    let nl = disp.n_local();
    let mut b = DMatrix::zeros(nl * dim, dofs.len());
    for m in 0..nl {
        for (j, d) in dofs.iter().enumerate() {
            for l in 0..=dim {
                let s = vol * tables.div_entry(m, d.local, l);
                if s == 0.0 {
                    continue;
                }
                for i in 0..dim {
                    b[(m * dim + i, j)] += s * tg[j][l][i];
                }
            }
        }
    }
    (dofs.iter().map(|d| d.dof).collect(), b)
}

/// `M[i][j] = int A phi_j : phi_i`.
pub fn assemble_mass(space: &StressSpace, mesh: &Mesh, tables: &RefTables, material: &Material) -> CsrMatrix {
    let n = space.n_dofs();
    let mut dof_cells: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, dofs) in space.cell_dofs.iter().enumerate() {
        for d in dofs {
            dof_cells[d.dof].push(c);
        }
    }
    let rows: Vec<Vec<usize>> = dof_cells
        .iter()
        .map(|cells| cells.iter().flat_map(|&c| space.cell_dofs[c].iter().map(|d| d.dof)).collect())
        .collect();
    drop(dof_cells);
    let mut m = CsrMatrix::from_pattern(n, n, rows);
    let gram = material.compliance_gram();
    for c in 0..mesh.n_cells() {
        let (dofs, local) = local_mass(space, mesh, tables, &gram, c);
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                m.add(gi, gj, local[(i, j)]);
            }
        }
    }
    m
}

/// `B[i][j] = int div phi_j . psi_i`.
pub fn assemble_div(space: &StressSpace, disp: &DisplacementSpace, mesh: &Mesh, tables: &RefTables) -> CsrMatrix {
    let block = disp.block();
    let mut rows = vec![Vec::new(); disp.n_dofs()];
    for c in 0..mesh.n_cells() {
        let cols: Vec<usize> = space.cell_dofs[c].iter().map(|d| d.dof).collect();
        for r in 0..block {
            rows[c * block + r] = cols.clone();
        }
    }
    let mut b = CsrMatrix::from_pattern(disp.n_dofs(), space.n_dofs(), rows);
    for c in 0..mesh.n_cells() {
        let (dofs, local) = local_div(space, disp, mesh, tables, c);
        for r in 0..block {
            for (j, &g) in dofs.iter().enumerate() {
                b.add(c * block + r, g, local[(r, j)]);
            }
        }
    }
    b
}

/// `F[i] = int f . psi_i` with a degree-8 rule.
pub fn assemble_load<F: Fn(&Point) -> [f64; 3]>(disp: &DisplacementSpace, mesh: &Mesh, f: F) -> Vec<f64> {
    let q = simplex_quadrature(mesh.dim, 8).expect("degree 8 is supported");
    let ref_vol: f64 = q.weights.iter().sum();
    let phis: Vec<Vec<f64>> = q.points.iter().map(|p| disp.basis.values(p)).collect();
    let mut out = vec![0.0; disp.n_dofs()];
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        let scale = mesh.volume(c) / ref_vol;
        for (k, lam) in q.points.iter().enumerate() {
            let fx = f(&geom::from_barycentric(&pts, lam));
            let w = q.weights[k] * scale;
            for (m, phi) in phis[k].iter().enumerate() {
                for i in 0..disp.dim {
                    out[disp.dof(c, m, i)] += w * phi * fx[i];
                }
            }
        }
    }
    out
}

/// `G[i] = int_{boundary} (phi_i n) . g`, the stress right-hand side for
/// prescribed boundary displacement `g`.
pub fn assemble_boundary_load<F: Fn(&Point) -> [f64; 3]>(space: &StressSpace, mesh: &Mesh, g: F) -> Vec<f64> {
    let q = simplex_quadrature(mesh.dim - 1, (space.degree + 4).min(10)).expect("supported rule");
    let ref_area: f64 = q.weights.iter().sum();
    let mut out = vec![0.0; space.n_dofs()];
    for facet in mesh.facets.iter().filter(|f| f.is_boundary()) {
        let c = facet.plus;
        let local = mesh.cell_facets[c].iter().position(|&f| mesh.facets[f].vertices == facet.vertices).expect("facet of its cell");
        let pts = mesh.cell_points(c);
        let scale = facet.measure / ref_area;
        for (k, fq) in q.points.iter().enumerate() {
            let mut it = fq.iter();
            let lam: Vec<f64> = (0..=mesh.dim).map(|v| if v == local { 0.0 } else { *it.next().unwrap() }).collect();
            let gx = g(&geom::from_barycentric(&pts, &lam));
            let phi = space.basis.values(&lam);
            let w = q.weights[k] * scale;
            for d in &space.cell_dofs[c] {
                let t = tensor::from_components(mesh.dim, &d.tensor[..n_sym(mesh.dim)]);
                let tn = tensor::mat_vec(&t, &facet.normal);
                out[d.dof] += w * phi[d.local] * geom::dot(&tn, &gx);
            }
        }
    }
    out
}

/// Inverses of the per-cell displacement mass blocks.
pub fn dual_mass_blocks(disp: &DisplacementSpace, mesh: &Mesh, tables: &RefTables) -> Vec<DMatrix<f64>> {
    let nl = disp.n_local();
    let dim = disp.dim;
    let inv = tables.vmass.clone().try_inverse().expect("mass matrix is invertible");
    (0..mesh.n_cells())
        .map(|c| {
            let s = 1.0 / mesh.volume(c);
            DMatrix::from_fn(nl * dim, nl * dim, |r, q| {
                if r % dim == q % dim {
                    s * inv[(r / dim, q / dim)]
                } else {
                    0.0
                }
            })
        })
        .collect()
}
