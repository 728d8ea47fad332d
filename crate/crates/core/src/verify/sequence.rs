//! Audit of the discrete elasticity sequence
//! `P1 -> U_h -J-> Sigma_h -div-> V_h -> 0` on a 2D macro mesh.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::airy::airy;
use crate::assembly::{assemble_div, RefTables};
use crate::error::{Error, Result};
use crate::mesh::{MacroMesh, SplitKind};
use crate::solver::dense::{dense_rank, RANK_TOL};
use crate::spaces::h2::H2Space;
use crate::spaces::{DisplacementSpace, StressFamily, StressSpace};

/// Relative least-squares residual accepted for `J u` in `Sigma_h`.
pub const INCLUSION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub n_macros: usize,
    pub dim_u: usize,
    pub dim_sigma: usize,
    pub dim_v: usize,
    /// `dim U_h - dim Sigma_h + dim V_h`; exactness forces 3.
    pub identity: i64,
    /// Largest relative residual of `J u` projected onto `Sigma_h`.
    pub inclusion_residual: f64,
    pub rank_div: usize,
    pub kernel_dim: usize,
    /// Rank of `J` on `U_h`; exactness at `Sigma_h` needs `dim U_h - 3`.
    pub airy_rank: usize,
    pub pass: bool,
}

/// Nodal values `(cell, lattice node, component)` of every stress basis
/// function, one column each.
fn stress_nodal_matrix(space: &StressSpace, n_cells: usize) -> DMatrix<f64> {
    let nl = space.basis.len();
    let mut s = DMatrix::zeros(n_cells * nl * 3, space.n_dofs());
    for (c, dofs) in space.cell_dofs.iter().enumerate() {
        for d in dofs {
            for k in 0..3 {
                s[((c * nl + d.local) * 3 + k, d.dof)] += d.tensor[k];
            }
        }
    }
    s
}

pub fn sequence_audit(mm: &MacroMesh) -> Result<SequenceReport> {
    if mm.kind != SplitKind::TwoDP2 {
        return Err(Error::InvalidInput("the sequence audit needs a 2D macro mesh".into()));
    }
    let mesh = &mm.fine;
    let family = StressFamily::TwoDP2;
    let space = StressSpace::new(mm, family)?;
    let disp = DisplacementSpace::new(mesh, family.degree())?;
    let tables = RefTables::new(2, family.degree())?;
    let u = H2Space::new(mm)?;

    let s = stress_nodal_matrix(&space, mesh.n_cells());
    let svd = s.clone().svd(true, false);
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > RANK_TOL * smax).collect();
    let uu = svd.u.expect("requested left singular vectors");
    let q = DMatrix::from_columns(&keep.iter().map(|&i| uu.column(i).into_owned()).collect::<Vec<_>>());

    let nl = space.basis.len();
    let mut images = DMatrix::zeros(s.nrows(), u.len());
    for (g, pieces) in u.basis.iter().enumerate() {
        for p in pieces {
            let j = airy(p, mesh)?;
            for (pos, &c) in j.cells.iter().enumerate() {
                for l in 0..nl {
                    for k in 0..3 {
                        images[((c * nl + l) * 3 + k, g)] = j.node_value(pos, l)[k];
                    }
                }
            }
        }
    }
    let mut inclusion_residual = 0.0_f64;
    for g in 0..u.len() {
        let x: DVector<f64> = images.column(g).into_owned();
        let r = &x - &q * (q.transpose() * &x);
        inclusion_residual = inclusion_residual.max(r.norm() / x.norm().max(f64::MIN_POSITIVE));
    }

    let b = assemble_div(&space, &disp, mesh, &tables).to_dense();
    let rank_div = dense_rank(&b, RANK_TOL);
    let airy_rank = dense_rank(&images, RANK_TOL);
    let (dim_u, dim_sigma, dim_v) = (u.len(), space.n_dofs(), disp.n_dofs());
    let identity = dim_u as i64 - dim_sigma as i64 + dim_v as i64;
    let kernel_dim = dim_sigma - rank_div;
    let pass = inclusion_residual < INCLUSION_TOL
        && rank_div == dim_v
        && identity == 3
        && kernel_dim + 3 == dim_u
        && airy_rank + 3 == dim_u;
    Ok(SequenceReport {
        n_macros: mm.macros.len(),
        dim_u,
        dim_sigma,
        dim_v,
        identity,
        inclusion_residual,
        rank_div,
        kernel_dim,
        airy_rank,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{macro_split_2d, unit_square_mesh};

    #[test]
    fn two_macro_square_is_exact() {
        let mm = macro_split_2d(&unit_square_mesh(1)).unwrap();
        let r = sequence_audit(&mm).unwrap();
        assert_eq!(r.n_macros, 2);
        assert_eq!(r.identity, 3);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn rejects_3d() {
        let mm = crate::mesh::macro_split_3d_p3(&crate::mesh::unit_cube_mesh(1)).unwrap();
        assert!(sequence_audit(&mm).is_err());
    }
}
