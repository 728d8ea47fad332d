//! Unisolvence of the 27 degrees of freedom of the composite H^2 element.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::certificate::{random_simplex, reference_simplex};
use crate::error::Result;
use crate::geom::Point;
use crate::mesh::{macro_split_2d, Mesh};
use crate::spaces::h2::{MacroH2, LOCAL_DOFS};

/// Reciprocal condition number below which the DoF matrix counts as singular.
pub const RCOND_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct UnisolvenceTrial {
    pub geometry: Vec<Point>,
    pub shape_dim: usize,
    pub rcond: f64,
    /// `max |D N - I|` for the dual basis `N`.
    pub kronecker_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnisolvenceReport {
    pub reference: UnisolvenceTrial,
    pub trials: Vec<UnisolvenceTrial>,
    pub pass: bool,
}

/// Builds the element on the triangle `pts` and checks its DoF matrix.
pub fn check_triangle(pts: &[Point]) -> Result<UnisolvenceTrial> {
    let mesh = Mesh::new(2, pts.to_vec(), vec![vec![0, 1, 2]])?;
    let mm = macro_split_2d(&mesh)?;
    let h = MacroH2::new(&mm, 0)?;
    let rcond = h.reciprocal_condition();
    let kronecker_residual = match h.nodal_basis() {
        Ok(n) => {
            let d = &h.dof_matrix * h.shape.transpose() * n;
            (d - DMatrix::identity(LOCAL_DOFS, LOCAL_DOFS)).amax()
        }
        Err(_) => f64::INFINITY,
    };
    Ok(UnisolvenceTrial {
        geometry: pts.to_vec(),
        shape_dim: h.shape.ncols(),
        rcond,
        kronecker_residual,
        pass: rcond > RCOND_TOL && kronecker_residual < 1e-9,
    })
}

/// Reference triangle plus `trials` random well-shaped triangles.
pub fn unisolvence_check(trials: usize, seed: u64) -> Result<UnisolvenceReport> {
    let reference = check_triangle(&reference_simplex(2))?;
    let trials = (0..trials)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            check_triangle(&random_simplex(2, &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = reference.pass && trials.iter().all(|t| t.pass);
    Ok(UnisolvenceReport { reference, trials, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_and_random_triangles() {
        let r = unisolvence_check(4, 11).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.reference.shape_dim, 27);
        assert!(r.trials.iter().all(|t| t.shape_dim == 27));
    }
}
