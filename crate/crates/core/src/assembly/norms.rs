//! Discretization errors in L^2 and H(div).

use serde::Serialize;

use super::quadrature::simplex_quadrature;
use crate::geom::{self, Point};
use crate::mesh::Mesh;
use crate::spaces::{DisplacementSpace, StressSpace};
use crate::tensor::{frobenius, n_sym};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub l2_stress: f64,
    pub hdiv_stress: f64,
    pub l2_displacement: f64,
}

/// Exact fields at a point: stress components, `div sigma`, displacement.
pub type ExactFields = ([f64; 6], [f64; 3], [f64; 3]);

/// `||sigma - sigma_h||_0`, `||sigma - sigma_h||_{H(div)}`, `||u - u_h||_0`
/// with a degree-8 rule per cell.
pub fn error_norms<F: Fn(&Point) -> ExactFields>(
    space: &StressSpace,
    disp: &DisplacementSpace,
    mesh: &Mesh,
    sigma: &[f64],
    u: &[f64],
    exact: F,
) -> ErrorNorms {
    let dim = mesh.dim;
    let ns = n_sym(dim);
    let q = simplex_quadrature(dim, 8).expect("degree 8 is supported");
    let ref_vol: f64 = q.weights.iter().sum();
    let (mut es, mut ed, mut eu) = (0.0, 0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        let grads = mesh.bary_gradients(c);
        let scale = mesh.volume(c) / ref_vol;
        for (k, lam) in q.points.iter().enumerate() {
            let w = q.weights[k] * scale;
            let (s, ds, uu) = exact(&geom::from_barycentric(&pts, lam));
            let sh = space.eval(sigma, c, lam);
            let dh = space.eval_div(sigma, c, lam, &grads);
            let uh = disp.eval(u, c, lam);
            let diff: Vec<f64> = (0..ns).map(|i| s[i] - sh[i]).collect();
            es += w * frobenius(dim, &diff, &diff);
            ed += w * (0..dim).map(|i| (ds[i] - dh[i]).powi(2)).sum::<f64>();
            eu += w * (0..dim).map(|i| (uu[i] - uh[i]).powi(2)).sum::<f64>();
        }
    }
    ErrorNorms { l2_stress: es.sqrt(), hdiv_stress: (es + ed).sqrt(), l2_displacement: eu.sqrt() }
}
