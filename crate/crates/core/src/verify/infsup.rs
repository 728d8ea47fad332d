//! Discrete inf-sup constant of the stress-displacement pair.
//!
//! With `X = M + B^T W^{-1} B` the H(div) Gram matrix (identity compliance)
//! and `W` the displacement mass matrix,
//! `beta^2 = min { mu > 0 : B X^{-1} B^T w = mu W w }`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::assembly::{assemble_div, assemble_mass, dual_mass_blocks, Material, RefTables};
use crate::converge::level_mesh;
use crate::error::{Error, Result};
use crate::solver::dense::generalized_eig_min;
use crate::spaces::{DisplacementSpace, StressFamily, StressSpace};

/// Largest accepted relative change of beta between successive levels.
pub const MAX_VARIATION: f64 = 0.25;

#[derive(Clone, Debug, Serialize)]
pub struct InfSupLevel {
    pub level: usize,
    pub n_sigma: usize,
    pub n_u: usize,
    pub beta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfSupReport {
    pub family: StressFamily,
    pub levels: Vec<InfSupLevel>,
    /// Largest `|beta_l - beta_{l-1}| / beta_{l-1}`.
    pub max_variation: f64,
    pub pass: bool,
}

fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// `beta` on one level of the unit square or cube.
pub fn infsup_constant(family: StressFamily, level: usize) -> Result<InfSupLevel> {
    let mm = level_mesh(family, level)?;
    let dim = family.dim();
    let space = StressSpace::new(&mm, family)?;
    let disp = DisplacementSpace::new(&mm.fine, family.degree())?;
    let tables = RefTables::new(dim, family.degree())?;
    let m = assemble_mass(&space, &mm.fine, &tables, &Material::new(0.5, 0.0, dim)).to_dense();
    let b = assemble_div(&space, &disp, &mm.fine, &tables).to_dense();
    let winv_blocks = dual_mass_blocks(&disp, &mm.fine, &tables);
    let w_blocks: Vec<DMatrix<f64>> =
        winv_blocks.iter().map(|x| x.clone().try_inverse().expect("mass blocks are invertible")).collect();
    let winv = block_diag(&winv_blocks);
    let x = &m + b.transpose() * &winv * &b;
    let xinv_bt = x
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("H(div) Gram matrix is not positive definite".into()))?
        .solve(&b.transpose());
    let s = &b * xinv_bt;
    let s = (&s + s.transpose()) * 0.5;
    let mu = generalized_eig_min(&s, &block_diag(&w_blocks), 1e-10)
        .ok_or_else(|| Error::SingularSystem("divergence is not onto".into()))?;
    Ok(InfSupLevel { level, n_sigma: space.n_dofs(), n_u: disp.n_dofs(), beta: mu.sqrt() })
}

/// `beta` on levels `1..=levels` with the successive-level variation check.
pub fn infsup_report(family: StressFamily, levels: usize) -> Result<InfSupReport> {
    let levels: Vec<InfSupLevel> = (1..=levels).map(|l| infsup_constant(family, l)).collect::<Result<_>>()?;
    let max_variation = levels.windows(2).map(|w| (w[1].beta - w[0].beta).abs() / w[0].beta).fold(0.0, f64::max);
    let pass = levels.iter().all(|l| l.beta > 0.0) && max_variation < MAX_VARIATION;
    Ok(InfSupReport { family, levels, max_variation, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_d_levels_are_stable() {
        let r = infsup_report(StressFamily::TwoDP2, 2).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.levels.iter().all(|l| l.beta > 0.05 && l.beta <= 1.0 + 1e-12));
    }
}
