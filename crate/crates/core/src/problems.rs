//! Manufactured pure-displacement problems with `u = 0` on the boundary.
//!
//! The load is `f = div sigma(u)`; second derivatives of `u` come from
//! forward-mode hyper-dual numbers, so `f` is exact to rounding.

use nalgebra::SVector;
use num_dual::{hessian, Dual2SVec64, DualNum};

use crate::assembly::material::Material;
use crate::geom::Point;
use crate::tensor::{n_sym, pairs};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Manufactured {
    /// `u = (e^{x-y} x(1-x) y(1-y), sin(pi x) sin(pi y))` on the unit square.
    Square,
    /// `u = (2^4, 2^5, 2^6) x(1-x) y(1-y) z(1-z)` on the unit cube.
    Cube,
}

fn square_component<D: DualNum<Primitive = f64>>(c: usize, x: D, y: D) -> D {
    let one = D::one();
    match c {
        0 => (x.clone() - y.clone()).exp() * x.clone() * (one.clone() - x) * y.clone() * (one - y),
        _ => {
            let pi = std::f64::consts::PI;
            (x * pi).sin() * (y * pi).sin()
        }
    }
}

fn cube_component<D: DualNum<Primitive = f64>>(c: usize, x: D, y: D, z: D) -> D {
    let one = D::one();
    let scale = [16.0, 32.0, 64.0][c];
    x.clone() * (one.clone() - x) * y.clone() * (one.clone() - y) * z.clone() * (one - z) * scale
}

/// Value, gradient and Hessian of one displacement component.
type Jet = (f64, [f64; 3], [[f64; 3]; 3]);

impl Manufactured {
    pub fn dim(self) -> usize {
        match self {
            Manufactured::Square => 2,
            Manufactured::Cube => 3,
        }
    }

    /// The material used for every reported run: `mu = 1/2`, `lambda = 1`.
    pub fn material(self) -> Material {
        Material::new(0.5, 1.0, self.dim())
    }

    fn jet(self, c: usize, x: &Point) -> Jet {
        let mut out = (0.0, [0.0; 3], [[0.0; 3]; 3]);
        match self {
            Manufactured::Square => {
                let (v, g, h) = hessian(
                    |p: SVector<Dual2SVec64<2>, 2>| square_component(c, p[0], p[1]),
                    &SVector::from([x[0], x[1]]),
                );
                out.0 = v;
                for i in 0..2 {
                    out.1[i] = g[i];
                    for j in 0..2 {
                        out.2[i][j] = h[(i, j)];
                    }
                }
            }
            Manufactured::Cube => {
                let (v, g, h) = hessian(
                    |p: SVector<Dual2SVec64<3>, 3>| cube_component(c, p[0], p[1], p[2]),
                    &SVector::from([x[0], x[1], x[2]]),
                );
                out.0 = v;
                for i in 0..3 {
                    out.1[i] = g[i];
                    for j in 0..3 {
                        out.2[i][j] = h[(i, j)];
                    }
                }
            }
        }
        out
    }

    pub fn displacement(self, x: &Point) -> [f64; 3] {
        let mut u = [0.0; 3];
        for (c, uc) in u.iter_mut().enumerate().take(self.dim()) {
            *uc = self.jet(c, x).0;
        }
        u
    }

    /// Exact stress components and load `f = div sigma` at `x`.
    pub fn stress_and_load(self, x: &Point) -> ([f64; 6], [f64; 3]) {
        self.stress_and_load_for(&self.material(), x)
    }

    /// Stress and load for an arbitrary material.
    pub fn stress_and_load_for(self, mat: &Material, x: &Point) -> ([f64; 6], [f64; 3]) {
        let dim = self.dim();
        let jets: Vec<Jet> = (0..dim).map(|c| self.jet(c, x)).collect();
        let eps: Vec<f64> =
            pairs(dim).iter().map(|&(i, j)| 0.5 * (jets[i].1[j] + jets[j].1[i])).collect();
        let s = mat.stiffness(&eps);
        let mut sigma = [0.0; 6];
        sigma[..n_sym(dim)].copy_from_slice(&s);
        // div sigma_i = mu (lap u_i + d_i div u) + lambda d_i div u
        let mut f = [0.0; 3];
        for i in 0..dim {
            let lap: f64 = (0..dim).map(|j| jets[i].2[j][j]).sum();
            let grad_div: f64 = (0..dim).map(|j| jets[j].2[j][i]).sum();
            f[i] = mat.mu * (lap + grad_div) + mat.lambda * grad_div;
        }
        (sigma, f)
    }

    pub fn stress(self, x: &Point) -> [f64; 6] {
        self.stress_and_load(x).0
    }

    pub fn load(self, x: &Point) -> [f64; 3] {
        self.stress_and_load(x).1
    }
}
