//! Convergence studies on uniformly refined unit square and cube meshes.

use serde::Serialize;

use crate::assembly::material::Material;
use crate::assembly::{
    assemble_div, assemble_load, assemble_mass, dual_mass_blocks, error_norms, ErrorNorms, RefTables,
};
use crate::error::{Error, Result};
use crate::mesh::{macro_split, unit_cube_mesh, unit_square_mesh, MacroMesh};
use crate::problems::Manufactured;
use crate::solver::{solve_saddle, SaddleSystem};
use crate::spaces::{DisplacementSpace, StressFamily, StressSpace};

pub const DEFAULT_MAX_DOFS: usize = 500_000;

/// Macro mesh of refinement level `level` (level 1 is the unrefined
/// square/cube mesh, split into macros).
pub fn level_mesh(family: StressFamily, level: usize) -> Result<MacroMesh> {
    let coarse = if family.dim() == 2 { unit_square_mesh(level) } else { unit_cube_mesh(level) };
    macro_split(&coarse, family.split())
}

pub fn problem_for(family: StressFamily) -> Manufactured {
    if family.dim() == 2 {
        Manufactured::Square
    } else {
        Manufactured::Cube
    }
}

#[derive(Clone, Debug)]
pub struct LevelSolution {
    pub mesh: MacroMesh,
    pub space: StressSpace,
    pub disp: DisplacementSpace,
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    pub errors: ErrorNorms,
    pub residual: f64,
}

/// Assembles and solves the manufactured problem on one mesh.
pub fn solve_on(mesh: MacroMesh, family: StressFamily, max_dofs: usize) -> Result<LevelSolution> {
    let material = problem_for(family).material();
    solve_with_material(mesh, family, &material, max_dofs)
}

/// Like [`solve_on`] with the Lame parameters overridden.
pub fn solve_with_material(
    mesh: MacroMesh,
    family: StressFamily,
    material: &Material,
    max_dofs: usize,
) -> Result<LevelSolution> {
    let problem = problem_for(family);
    let space = StressSpace::new(&mesh, family)?;
    if space.n_dofs() > max_dofs {
        return Err(Error::DofCap { dofs: space.n_dofs(), cap: max_dofs });
    }
    let disp = DisplacementSpace::new(&mesh.fine, family.degree())?;
    let tables = RefTables::new(family.dim(), family.degree())?;
    let system = SaddleSystem {
        m: assemble_mass(&space, &mesh.fine, &tables, material),
        b: assemble_div(&space, &disp, &mesh.fine, &tables),
        f: assemble_load(&disp, &mesh.fine, |x| problem.stress_and_load_for(material, x).1),
        dual_blocks: dual_mass_blocks(&disp, &mesh.fine, &tables),
    };
    let sol = solve_saddle(&system)?;
    drop(system);
    let errors = error_norms(&space, &disp, &mesh.fine, &sol.sigma, &sol.u, |x| {
        let (s, f) = problem.stress_and_load_for(material, x);
        (s, f, problem.displacement(x))
    });
    Ok(LevelSolution { mesh, space, disp, sigma: sol.sigma, u: sol.u, errors, residual: sol.residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub meshsize: f64,
    pub e_sigma_l2: f64,
    pub rate_sigma: Option<f64>,
    pub e_u_l2: f64,
    pub rate_u: Option<f64>,
    pub e_sigma_hdiv: f64,
    pub rate_hdiv: Option<f64>,
    pub n_dof_sigma: usize,
    pub n_dof_u: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub family: StressFamily,
    pub rows: Vec<ConvergenceRow>,
}

fn rate(prev: Option<&ConvergenceRow>, cur: f64, pick: fn(&ConvergenceRow) -> f64) -> Option<f64> {
    prev.map(|p| (pick(p) / cur).log2())
}

impl ConvergenceReport {
    pub fn new(family: StressFamily) -> Self {
        ConvergenceReport { family, rows: Vec::new() }
    }

    /// Appends a level; rates are computed from the previous row.
    pub fn push(&mut self, meshsize: f64, errors: &ErrorNorms, n_dof_sigma: usize, n_dof_u: usize, seconds: f64) {
        let prev = self.rows.last();
        let row = ConvergenceRow {
            meshsize,
            e_sigma_l2: errors.l2_stress,
            rate_sigma: rate(prev, errors.l2_stress, |r| r.e_sigma_l2),
            e_u_l2: errors.l2_displacement,
            rate_u: rate(prev, errors.l2_displacement, |r| r.e_u_l2),
            e_sigma_hdiv: errors.hdiv_stress,
            rate_hdiv: rate(prev, errors.hdiv_stress, |r| r.e_sigma_hdiv),
            n_dof_sigma,
            n_dof_u,
            seconds,
        };
        self.rows.push(row);
    }

    pub const CSV_HEADER: &'static str =
        "meshsize,e_sigma_L2,rate_sigma,e_u_L2,rate_u,e_sigma_Hdiv,rate_hdiv,n_dof_sigma,n_dof_u,seconds";

    pub fn csv_row(row: &ConvergenceRow) -> String {
        let r = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        format!(
            "{},{:.6e},{},{:.6e},{},{:.6e},{},{},{},{:.3}",
            row.meshsize,
            row.e_sigma_l2,
            r(row.rate_sigma),
            row.e_u_l2,
            r(row.rate_u),
            row.e_sigma_hdiv,
            r(row.rate_hdiv),
            row.n_dof_sigma,
            row.n_dof_u,
            row.seconds
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for row in &self.rows {
            s.push_str(&Self::csv_row(row));
            s.push('\n');
        }
        s
    }
}

// std has no clock on wasm32-unknown-unknown; timings read zero there.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        return Stopwatch(std::time::Instant::now());
        #[cfg(target_arch = "wasm32")]
        return Stopwatch();
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// Runs levels `1..=levels`, calling `on_row` after each level.
pub fn run_convergence<F: FnMut(&ConvergenceRow)>(
    family: StressFamily,
    levels: usize,
    max_dofs: usize,
    mut on_row: F,
) -> Result<ConvergenceReport> {
    let mut report = ConvergenceReport::new(family);
    for level in 1..=levels {
        let start = Stopwatch::start();
        let sol = solve_on(level_mesh(family, level)?, family, max_dofs)?;
        let meshsize = 0.5f64.powi(level as i32 - 1);
        report.push(meshsize, &sol.errors, sol.space.n_dofs(), sol.disp.n_dofs(), start.seconds());
        on_row(report.rows.last().unwrap());
    }
    Ok(report)
}
