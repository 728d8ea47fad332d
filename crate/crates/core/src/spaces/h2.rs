//! Composite H^2 element on the 2D macro-element: piecewise quartics with
//! 27 degrees of freedom (value, gradient and Hessian at the macro
//! vertices; normal derivative and the second derivatives along the edge
//! at the edge midpoints).

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::piecewise::PiecewisePoly;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::{MacroMesh, Mesh, SplitKind};
use crate::poly::LagrangeBasis;
use crate::solver::dense::{nullspace, singular_values};

pub const DEGREE: usize = 4;
pub const LOCAL_DOFS: usize = 27;
const NULL_TOL: f64 = 1e-10;

/// A linear functional on scalar fields at a point: value, first or second
/// directional derivative.
#[derive(Clone, Copy, Debug)]
pub enum Functional {
    Value,
    First(Point),
    Second(Point, Point),
}

/// Rows of the value/derivative functionals at barycentric point `lam` of
/// cell `c`, one entry per local Lagrange node.
fn functional_row(mesh: &Mesh, basis: &LagrangeBasis, c: usize, lam: &[f64], f: Functional) -> Vec<f64> {
    let grads = mesh.bary_gradients(c);
    match f {
        Functional::Value => basis.values(lam),
        Functional::First(a) => basis.gradients(lam, &grads).iter().map(|g| geom::dot(g, &a)).collect(),
        Functional::Second(a, b) => basis
            .hessians(lam, &grads)
            .iter()
            .map(|h| (0..3).map(|i| (0..3).map(|j| a[i] * h[i][j] * b[j]).sum::<f64>()).sum())
            .collect(),
    }
}

fn unit(i: usize) -> Point {
    let mut e = [0.0; 3];
    e[i] = 1.0;
    e
}

/// Value, gradient and Hessian functionals (6).
fn full_c2() -> Vec<Functional> {
    let (x, y) = (unit(0), unit(1));
    vec![
        Functional::Value,
        Functional::First(x),
        Functional::First(y),
        Functional::Second(x, x),
        Functional::Second(y, y),
        Functional::Second(x, y),
    ]
}

/// Oriented unit tangent (lower to higher vertex id) and normal of an edge.
pub fn edge_frame(mesh: &Mesh, a: usize, b: usize) -> (Point, Point) {
    let (a, b) = (a.min(b), a.max(b));
    let t = geom::normalize(&geom::sub(&mesh.vertices[b], &mesh.vertices[a]));
    (t, [t[1], -t[0], 0.0])
}

/// Local view of one macro: cells, and the lattice index of a named point
/// in each cell that contains it.
struct MacroView<'a> {
    mesh: &'a Mesh,
    cells: Vec<usize>,
}

impl MacroView<'_> {
    /// `(position, barycentric)` for every macro cell containing vertex `v`.
    fn at_vertex(&self, v: usize) -> Vec<(usize, Vec<f64>)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(j, &c)| {
                let k = self.mesh.cells[c].iter().position(|&w| w == v)?;
                let mut lam = vec![0.0; 3];
                lam[k] = 1.0;
                Some((j, lam))
            })
            .collect()
    }

    /// `(position, barycentric)` for every macro cell containing the
    /// midpoint of fine edge `(a, b)`.
    fn at_midpoint(&self, a: usize, b: usize) -> Vec<(usize, Vec<f64>)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(j, &c)| {
                let cell = &self.mesh.cells[c];
                let ka = cell.iter().position(|&w| w == a)?;
                let kb = cell.iter().position(|&w| w == b)?;
                let mut lam = vec![0.0; 3];
                lam[ka] = 0.5;
                lam[kb] = 0.5;
                Some((j, lam))
            })
            .collect()
    }

    fn row(&self, basis: &LagrangeBasis, j: usize, lam: &[f64], f: Functional) -> Vec<f64> {
        let nl = basis.len();
        let mut r = vec![0.0; self.cells.len() * nl];
        let local = functional_row(self.mesh, basis, self.cells[j], lam, f);
        r[j * nl..(j + 1) * nl].copy_from_slice(&local);
        r
    }

    /// Continuity rows of `f` between the first incident cell and the others.
    fn continuity(&self, basis: &LagrangeBasis, at: &[(usize, Vec<f64>)], f: Functional, rows: &mut Vec<Vec<f64>>) {
        for (j, lam) in &at[1..] {
            let mut r = self.row(basis, at[0].0, &at[0].1, f);
            for (x, y) in r.iter_mut().zip(self.row(basis, *j, lam, f)) {
                *x -= y;
            }
            rows.push(r);
        }
    }
}

/// Shape space and local degrees of freedom of one macro.
#[derive(Clone, Debug)]
pub struct MacroH2 {
    pub macro_index: usize,
    pub cells: Vec<usize>,
    /// Columns: nodal values (cell-major) of a basis of the shape space.
    pub shape: DMatrix<f64>,
    /// `dofs x shape.ncols()` matrix of the 27 functionals on the shape basis.
    pub dof_matrix: DMatrix<f64>,
    /// Global key of each local DoF: `(vertex or edge, functional index)`.
    pub dof_keys: Vec<DofKey>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DofKey {
    /// Coarse vertex id and index in value, d/dx, d/dy, d2/dxx, d2/dyy, d2/dxdy.
    Vertex(usize, usize),
    /// Coarse edge (sorted vertex ids) and index in d/dn, d2/dtdn, d2/dtdt.
    Edge(usize, usize, usize),
}

impl MacroH2 {
    /// Builds the shape space of macro `index` as the nullspace of the
    /// continuity conditions on piecewise quartics.
    pub fn new(mm: &MacroMesh, index: usize) -> Result<MacroH2> {
        if mm.kind != SplitKind::TwoDP2 {
            return Err(Error::InvalidInput("the H^2 element needs the 2D macro split".into()));
        }
        let m = &mm.macros[index];
        let mesh = &mm.fine;
        let basis = LagrangeBasis::new(2, DEGREE)?;
        let view = MacroView { mesh, cells: m.cells.clone() };
        let mut rows = Vec::new();
        for f in full_c2() {
            view.continuity(&basis, &view.at_vertex(m.node("x0")), f, &mut rows);
        }
        for (name, a, b) in [("m1", "x1", "x2"), ("m2", "x0", "x1"), ("m3", "x0", "x2")] {
            let (t, n) = edge_frame(mesh, m.node(a), m.node(b));
            let at = view.at_vertex(m.node(name));
            for f in [
                Functional::Value,
                Functional::First(unit(0)),
                Functional::First(unit(1)),
                Functional::Second(t, t),
                Functional::Second(t, n),
            ] {
                view.continuity(&basis, &at, f, &mut rows);
            }
        }
        for (a, b) in [("m1", "m2"), ("m1", "m3")] {
            view.continuity(&basis, &view.at_midpoint(m.node(a), m.node(b)), Functional::Value, &mut rows);
        }
        let n = view.cells.len() * basis.len();
        let cons = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        let shape = nullspace(&cons, NULL_TOL);
        if shape.ncols() != LOCAL_DOFS {
            return Err(Error::DimensionMismatch { expected: LOCAL_DOFS, found: shape.ncols() });
        }

        let corners = m.corners(2);
        let mut dof_rows = Vec::new();
        let mut dof_keys = Vec::new();
        for &v in &corners {
            let (j, lam) = view.at_vertex(v).remove(0);
            for (i, f) in full_c2().into_iter().enumerate() {
                dof_rows.push(view.row(&basis, j, &lam, f));
                dof_keys.push(DofKey::Vertex(v, i));
            }
        }
        for (name, a, b) in [("m1", "x1", "x2"), ("m2", "x0", "x1"), ("m3", "x0", "x2")] {
            let (va, vb) = (m.node(a), m.node(b));
            let (t, n) = edge_frame(mesh, va, vb);
            let (j, lam) = view.at_vertex(m.node(name)).remove(0);
            for (i, f) in
                [Functional::First(n), Functional::Second(t, n), Functional::Second(t, t)].into_iter().enumerate()
            {
                dof_rows.push(view.row(&basis, j, &lam, f));
                dof_keys.push(DofKey::Edge(va.min(vb), va.max(vb), i));
            }
        }
        let d = DMatrix::from_fn(dof_rows.len(), n, |i, j| dof_rows[i][j]);
        let dof_matrix = &d * &shape;
        Ok(MacroH2 { macro_index: index, cells: m.cells.clone(), shape, dof_matrix, dof_keys })
    }

    /// Ratio of the smallest to the largest singular value of the DoF matrix.
    pub fn reciprocal_condition(&self) -> f64 {
        let s = singular_values(&self.dof_matrix);
        s.last().copied().unwrap_or(0.0) / s[0]
    }

    /// Nodal basis (columns, nodal values) dual to the DoFs.
    pub fn nodal_basis(&self) -> Result<DMatrix<f64>> {
        let inv = self
            .dof_matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularSystem("H^2 DoF matrix is singular".into()))?;
        Ok(&self.shape * inv)
    }

    fn to_poly(&self, col: &[f64]) -> PiecewisePoly {
        let nl = LagrangeBasis::count(2, DEGREE);
        let mut p = PiecewisePoly::zeros(2, DEGREE, 1, self.cells.clone());
        for j in 0..self.cells.len() {
            p.values[j].copy_from_slice(&col[j * nl..(j + 1) * nl]);
        }
        p
    }
}

/// The global space `U_h`: one function per vertex/edge DoF, glued from the
/// macro nodal bases.
#[derive(Clone, Debug)]
pub struct H2Space {
    pub keys: Vec<DofKey>,
    /// Per global DoF, its pieces on the macros where it is supported.
    pub basis: Vec<Vec<PiecewisePoly>>,
}

impl H2Space {
    pub fn new(mm: &MacroMesh) -> Result<H2Space> {
        let mut pieces: BTreeMap<DofKey, Vec<PiecewisePoly>> = BTreeMap::new();
        for index in 0..mm.macros.len() {
            let local = MacroH2::new(mm, index)?;
            let nodal = local.nodal_basis()?;
            for (i, key) in local.dof_keys.iter().enumerate() {
                pieces.entry(*key).or_default().push(local.to_poly(nodal.column(i).as_slice()));
            }
        }
        let (keys, basis) = pieces.into_iter().unzip();
        Ok(H2Space { keys, basis })
    }

    /// Largest jump of value or gradient of any basis function across an
    /// interior fine edge, sampled at interior points of the edge.
    pub fn c1_jump(&self, mm: &MacroMesh) -> f64 {
        let mesh = &mm.fine;
        let basis = LagrangeBasis::new(2, DEGREE).expect("quartics are supported");
        let grads: Vec<Vec<Point>> = (0..mesh.n_cells()).map(|c| mesh.bary_gradients(c)).collect();
        let jet = |pieces: &[PiecewisePoly], c: usize, x: &Point| -> [f64; 3] {
            for p in pieces {
                if let Some(j) = p.position(c) {
                    let lam = geom::barycentric(2, &mesh.cell_points(c), x);
                    let v = p.eval(&basis, j, &lam)[0];
                    let g = p.gradient(&basis, j, &lam, &grads[c])[0];
                    return [v, g[0], g[1]];
                }
            }
            [0.0; 3]
        };
        let mut worst = 0.0_f64;
        for f in mesh.facets.iter().filter(|f| !f.is_boundary()) {
            let (a, b) = (mesh.vertices[f.vertices[0]], mesh.vertices[f.vertices[1]]);
            for t in [0.13, 0.37, 0.5, 0.71, 0.94] {
                let x = geom::add(&a, &geom::scale(&geom::sub(&b, &a), t));
                for pieces in &self.basis {
                    let (p, q) = (jet(pieces, f.plus, &x), jet(pieces, f.minus.unwrap(), &x));
                    let scale = 1.0 + p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                    for i in 0..3 {
                        worst = worst.max((p[i] - q[i]).abs() / scale);
                    }
                }
            }
        }
        worst
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}
