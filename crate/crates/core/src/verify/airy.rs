//! The Airy operator `J q = [[q_yy, -q_xy], [-q_xy, q_xx]]`.

use nalgebra::SVector;
use num_dual::{hessian, Dual2SVec64};

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::Mesh;
use crate::poly::LagrangeBasis;
use crate::spaces::PiecewisePoly;

/// Tensor components `(00, 11, 01)` of `J q` from a Hessian.
pub fn airy_components(h: &[[f64; 3]; 3]) -> [f64; 3] {
    [h[1][1], h[0][0], -h[0][1]]
}

/// `J q` of a scalar piecewise polynomial of degree `d >= 2`, as a tensor
/// field of degree `d - 2`. Exact: Hessians are sampled at the nodes of the
/// lower-degree lattice.
pub fn airy(q: &PiecewisePoly, mesh: &Mesh) -> Result<PiecewisePoly> {
    if q.dim != 2 || mesh.dim != 2 {
        return Err(Error::InvalidInput("the Airy operator is two-dimensional".into()));
    }
    if q.ncomp != 1 || q.degree < 2 {
        return Err(Error::InvalidInput("J needs a scalar field of degree at least 2".into()));
    }
    let src = LagrangeBasis::new(2, q.degree)?;
    let dst = LagrangeBasis::new(2, q.degree - 2)?;
    let mut out = PiecewisePoly::zeros(2, q.degree - 2, 3, q.cells.clone());
    for (j, &c) in q.cells.iter().enumerate() {
        let grads = mesh.bary_gradients(c);
        for l in 0..dst.len() {
            let hs = src.hessians(&dst.node_bary(l), &grads);
            let mut h = [[0.0; 3]; 3];
            for (hm, v) in hs.iter().zip(&q.values[j]) {
                for a in 0..2 {
                    for b in 0..2 {
                        h[a][b] += v * hm[a][b];
                    }
                }
            }
            out.set_node_value(j, l, &airy_components(&h));
        }
    }
    Ok(out)
}

/// `J q` at `x` for a closed-form `q`, by forward-mode second derivatives.
pub fn airy_at<F>(q: F, x: &Point) -> [f64; 3]
where
    F: Fn(Dual2SVec64<2>, Dual2SVec64<2>) -> Dual2SVec64<2>,
{
    let (_, _, h) = hessian(|p: SVector<Dual2SVec64<2>, 2>| q(p[0], p[1]), &SVector::from([x[0], x[1]]));
    airy_components(&[[h[(0, 0)], h[(0, 1)], 0.0], [h[(1, 0)], h[(1, 1)], 0.0], [0.0; 3]])
}

/// Interpolates a closed-form scalar on the degree-`degree` lattice of every
/// cell of `mesh`.
pub fn interpolate<F: Fn(&Point) -> f64>(mesh: &Mesh, degree: usize, f: F) -> Result<PiecewisePoly> {
    let basis = LagrangeBasis::new(mesh.dim, degree)?;
    let mut p = PiecewisePoly::zeros(mesh.dim, degree, 1, (0..mesh.n_cells()).collect());
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        for l in 0..basis.len() {
            p.set_node_value(c, l, &[f(&geom::from_barycentric(&pts, &basis.node_bary(l)))]);
        }
    }
    Ok(p)
}
