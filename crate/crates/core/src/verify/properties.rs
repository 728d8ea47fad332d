//! Mesh-level invariants of an assembled stress-displacement pair: divergence
//! containment, bubble orthogonality to rigid motions, and the patch test.

use serde::Serialize;

use crate::assembly::forms::local_div;
use crate::assembly::{
    assemble_boundary_load, assemble_div, assemble_mass, dual_mass_blocks, error_norms, simplex_quadrature, Material,
    RefTables,
};
use crate::error::Result;
use crate::geom::Point;
use crate::mesh::MacroMesh;
use crate::solver::{solve_saddle_with, SaddleSystem};
use crate::spaces::{macro_bubble_space, CellVectorBasis, DisplacementSpace, StressFamily, StressSpace};
use crate::tensor::{self, n_sym};

pub const DIV_TOL: f64 = 1e-10;
pub const RM_TOL: f64 = 1e-10;
pub const PATCH_TOL: f64 = 1e-9;

/// Largest relative gap between `div phi` and its projection onto the
/// displacement space, over all stress basis functions and cells.
pub fn div_containment(space: &StressSpace, disp: &DisplacementSpace, mm: &MacroMesh, tables: &RefTables) -> f64 {
    let mesh = &mm.fine;
    let dim = mesh.dim;
    let q = simplex_quadrature(dim, 2 * space.degree).expect("supported rule");
    let dual = dual_mass_blocks(disp, mesh, tables);
    let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let (_, b) = local_div(space, disp, mesh, tables, c);
        let proj = &dual[c] * b;
        let grads = mesh.bary_gradients(c);
        for lam in &q.points {
            let dphi = space.basis.gradients(lam, &grads);
            let chi = disp.basis.values(lam);
            for (j, d) in space.cell_dofs[c].iter().enumerate() {
                let t = tensor::from_components(dim, &d.tensor[..n_sym(dim)]);
                let exact = tensor::mat_vec(&t, &dphi[d.local]);
                for i in 0..dim {
                    let p: f64 = chi.iter().enumerate().map(|(m, x)| x * proj[(m * dim + i, j)]).sum();
                    worst = worst.max((exact[i] - p).abs());
                    scale = scale.max(exact[i].abs());
                }
            }
        }
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

/// Largest `|int_M div tau . r| / max |B|` over the macro bubbles `tau` and
/// rigid motions `r` of every macro. Zero when the family has no bubbles.
pub fn bubble_rm_orthogonality(mm: &MacroMesh, family: StressFamily) -> Result<f64> {
    if family == StressFamily::ThreeDP2Flat {
        return Ok(0.0);
    }
    let tables = RefTables::new(family.dim(), family.degree())?;
    let mut worst: f64 = 0.0;
    for index in 0..mm.macros.len() {
        let bubbles = macro_bubble_space(mm, index, family)?;
        let b = bubbles.divergence_matrix(&mm.fine, &tables);
        let rm = CellVectorBasis::new(family.dim(), family.degree() - 1, bubbles.cells.clone()).rigid_motions(&mm.fine);
        worst = worst.max((rm.transpose() * &b).amax() / b.amax().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchReport {
    pub stress_error: f64,
    pub displacement_error: f64,
    pub residual: f64,
    pub pass: bool,
}

/// [`patch_test_with`] for fixed data with a non-symmetric gradient.
pub fn patch_test(mm: &MacroMesh, family: StressFamily) -> Result<PatchReport> {
    let material = Material::new(0.7, 1.3, family.dim());
    let g = [[0.4, -0.9, 0.2], [0.6, 0.1, -0.5], [0.3, 0.8, -0.2]];
    patch_test_with(mm, family, &material, [0.3, -0.2, 0.5], g)
}

/// Solves with `f = 0` and boundary displacement `u = a + G x`. The
/// constant stress `C eps(u)` and the linear `u` lie in the discrete
/// spaces, so both must come back to solver accuracy.
pub fn patch_test_with(
    mm: &MacroMesh,
    family: StressFamily,
    material: &Material,
    a: [f64; 3],
    g: [[f64; 3]; 3],
) -> Result<PatchReport> {
    let dim = family.dim();
    let exact_u = |x: &Point| {
        let mut u = [0.0; 3];
        for i in 0..dim {
            u[i] = a[i] + (0..dim).map(|j| g[i][j] * x[j]).sum::<f64>();
        }
        u
    };
    let mut eps = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            eps[i][j] = 0.5 * (g[i][j] + g[j][i]);
        }
    }
    let stress = material.stiffness(&tensor::to_components(dim, &eps));
    let mut s6 = [0.0; 6];
    s6[..stress.len()].copy_from_slice(&stress);

    let space = StressSpace::new(mm, family)?;
    let disp = DisplacementSpace::new(&mm.fine, family.degree())?;
    let tables = RefTables::new(dim, family.degree())?;
    let system = SaddleSystem {
        m: assemble_mass(&space, &mm.fine, &tables, material),
        b: assemble_div(&space, &disp, &mm.fine, &tables),
        f: vec![0.0; disp.n_dofs()],
        dual_blocks: dual_mass_blocks(&disp, &mm.fine, &tables),
    };
    let rhs = assemble_boundary_load(&space, &mm.fine, exact_u);
    let sol = solve_saddle_with(&system, &rhs)?;
    let e = error_norms(&space, &disp, &mm.fine, &sol.sigma, &sol.u, |x| (s6, [0.0; 3], exact_u(x)));
    let vol = mm.fine.total_volume().sqrt();
    // Relative to the data, floored so that near-zero data is not amplified.
    let s_norm = tensor::frobenius(dim, &stress, &stress).sqrt().max(1.0) * vol;
    let u_norm = (a.iter().map(|x| x * x).sum::<f64>() + g.iter().flatten().map(|x| x * x).sum::<f64>()).sqrt().max(1.0);
    let stress_error = e.hdiv_stress / s_norm;
    let displacement_error = e.l2_displacement / (u_norm * vol);
    Ok(PatchReport {
        stress_error,
        displacement_error,
        residual: sol.residual,
        pass: stress_error < PATCH_TOL && displacement_error < PATCH_TOL,
    })
}
