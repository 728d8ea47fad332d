//! Divergence-rank certificates for the macro bubble spaces.
//!
//! On one macro `M`, div maps the bubbles into the piecewise `P_{k-1}`
//! vector fields orthogonal to the rigid motions, so the bubble space is
//! large enough exactly when `rank B_div = N_u - dim RM`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::RefTables;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::{macro_split, Mesh};
use crate::solver::dense::{dense_rank, singular_gap, singular_values, RANK_TOL};
use crate::spaces::{macro_bubble_space, CellVectorBasis, StressFamily};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20240601;
/// Smallest admissible interior angle (2D) or dihedral angle (3D), degrees.
pub const MIN_ANGLE_DEG: f64 = 15.0;

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub family: StressFamily,
    #[serde(rename = "N_u")]
    pub n_u: usize,
    #[serde(rename = "N_sigma")]
    pub n_sigma: usize,
    pub rank: usize,
    pub required: usize,
    pub sv_gap: f64,
    pub pass: bool,
    /// Largest pairing of a divergence column with a rigid motion; zero
    /// up to rounding because bubbles have no boundary traction.
    pub rm_residual: f64,
    /// Vertices of the macro that was tested.
    pub geometry: Vec<Point>,
}

/// Vertices of the reference simplex: origin and unit points.
pub fn reference_simplex(dim: usize) -> Vec<Point> {
    let mut v = vec![[0.0; 3]];
    for i in 0..dim {
        let mut p = [0.0; 3];
        p[i] = 1.0;
        v.push(p);
    }
    v
}

/// Smallest interior angle (2D) or dihedral angle (3D) in degrees.
///
/// Uses barycentric gradients, which are inward facet normals: the angle
/// between facets `i` and `j` has cosine `-g_i . g_j / (|g_i| |g_j|)`.
pub fn min_angle_deg(dim: usize, pts: &[Point]) -> f64 {
    if geom::signed_volume(dim, pts).abs() < 1e-14 {
        return 0.0;
    }
    let g = geom::bary_gradients(dim, pts);
    let mut best = 180.0_f64;
    for i in 0..=dim {
        for j in i + 1..=dim {
            let c = -geom::dot(&g[i], &g[j]) / (geom::norm(&g[i]) * geom::norm(&g[j]));
            best = best.min(c.clamp(-1.0, 1.0).acos().to_degrees());
        }
    }
    best
}

/// Random simplex with vertices uniform in the unit cube, redrawn until its
/// angles respect [`MIN_ANGLE_DEG`].
pub fn random_simplex<R: Rng>(dim: usize, rng: &mut R) -> Vec<Point> {
    loop {
        let pts: Vec<Point> = (0..=dim)
            .map(|_| {
                let mut p = [0.0; 3];
                for x in p.iter_mut().take(dim) {
                    *x = rng.gen::<f64>();
                }
                p
            })
            .collect();
        if min_angle_deg(dim, &pts) >= MIN_ANGLE_DEG {
            return pts;
        }
    }
}

/// Certificate on the macro over the simplex `pts`.
pub fn certificate_on(family: StressFamily, pts: &[Point]) -> Result<Certificate> {
    let dim = family.dim();
    if pts.len() != dim + 1 {
        return Err(Error::InvalidInput(format!("{family} needs {} vertices", dim + 1)));
    }
    let angle = min_angle_deg(dim, pts);
    if angle < MIN_ANGLE_DEG {
        return Err(Error::InvalidInput(format!("macro too flat: smallest angle {angle:.2} degrees")));
    }
    let coarse = Mesh::new(dim, pts.to_vec(), vec![(0..=dim).collect()])?;
    let mm = macro_split(&coarse, family.split())?;
    let bubbles = macro_bubble_space(&mm, 0, family)?;
    let tables = RefTables::new(dim, family.degree())?;
    let b = bubbles.divergence_matrix(&mm.fine, &tables);
    let vb = CellVectorBasis::new(dim, family.degree() - 1, bubbles.cells.clone());
    let rm = vb.rigid_motions(&mm.fine);
    let rm_residual = (rm.transpose() * &b).amax() / b.amax().max(f64::MIN_POSITIVE);
    let s = singular_values(&b);
    let rank = dense_rank(&b, RANK_TOL);
    let n_u = b.nrows();
    let required = n_u - dim * (dim + 1) / 2;
    Ok(Certificate {
        family,
        n_u,
        n_sigma: b.ncols(),
        rank,
        required,
        sv_gap: singular_gap(&s, rank),
        pass: rank == required,
        rm_residual,
        geometry: pts.to_vec(),
    })
}

/// Certificate on the reference macro.
pub fn rank_certificate(family: StressFamily) -> Result<Certificate> {
    if family == StressFamily::ThreeDP2Flat {
        return Err(Error::InvalidInput("the unsplit family has no macro bubbles".into()));
    }
    certificate_on(family, &reference_simplex(family.dim()))
}

/// Certificates on `trials` random well-shaped macros. Trial `i` draws from
/// stream `i` of a generator seeded with `seed`, so results do not depend
/// on scheduling.
pub fn random_geometry_certificate(family: StressFamily, trials: usize, seed: u64) -> Result<Vec<Certificate>> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is needed".into()));
    }
    let run = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        certificate_on(family, &random_simplex(family.dim(), &mut rng))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(run).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_2d() {
        let c = rank_certificate(StressFamily::TwoDP2).unwrap();
        assert_eq!((c.n_u, c.rank, c.required), (24, 21, 21));
        assert!(c.pass && c.rm_residual < 1e-11 && c.sv_gap > 1e6);
    }

    #[test]
    fn reference_3d_p2() {
        let c = rank_certificate(StressFamily::ThreeDP2).unwrap();
        assert_eq!((c.n_u, c.rank, c.required), (144, 138, 138));
        assert!(c.pass && c.sv_gap >= 1e6, "{c:?}");
    }

    #[test]
    fn random_trials_are_reproducible() {
        let a = random_geometry_certificate(StressFamily::TwoDP2, 3, 7).unwrap();
        let b = random_geometry_certificate(StressFamily::TwoDP2, 3, 7).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.pass);
            assert_eq!(x.geometry, y.geometry);
        }
        assert_ne!(a[0].geometry, a[1].geometry);
    }

    #[test]
    fn flat_macro_is_rejected() {
        let pts = [[0.0; 3], [1.0, 0.0, 0.0], [0.5, 0.05, 0.0]];
        assert!(certificate_on(StressFamily::TwoDP2, &pts).is_err());
        assert!((min_angle_deg(2, &reference_simplex(2)) - 45.0).abs() < 1e-12);
    }

    #[test]
    fn identity_geometry_matches_reference() {
        let a = rank_certificate(StressFamily::ThreeDP3).unwrap();
        let b = certificate_on(StressFamily::ThreeDP3, &reference_simplex(3)).unwrap();
        assert_eq!((a.rank, a.n_sigma), (b.rank, b.n_sigma));
        assert_eq!((a.n_u, a.required), (120, 114));
        assert!(a.pass, "{a:?}");
    }
}
