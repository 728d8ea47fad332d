//! Stress spaces.
//!
//! Every space here is a sum over Lagrange nodes `X` of `Phi_X` times a
//! subspace `W_X` of cellwise tensor values on the cells around `X`. All
//! conformity conditions (normal continuity, vertex continuity, vanishing
//! traces) are nodal, so the spaces are built node by node: the generators
//! of `W_X` are the continuous tensors, element bubbles and the macro
//! additions, and a greedy rank-revealing pass picks an independent subset.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use super::constraints::{bilinear_row, traction_rows, Constraints};
use super::nodes::NodeMap;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::{MacroMesh, SplitKind};
use crate::poly::LagrangeBasis;
use crate::solver::dense::nullspace;
use crate::tensor::{self, n_sym};

const SELECT_TOL: f64 = 1e-8;
const NULL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StressFamily {
    #[serde(rename = "2d-p2")]
    TwoDP2,
    #[serde(rename = "3d-p3")]
    ThreeDP3,
    #[serde(rename = "3d-p2")]
    ThreeDP2,
    /// Degree-2 stresses on an unsplit tetrahedral mesh: vertex continuity,
    /// continuity of the normal-plane block on edges, H(div) conformity.
    #[serde(rename = "3d-p2-flat")]
    ThreeDP2Flat,
}

impl StressFamily {
    pub fn name(self) -> &'static str {
        match self {
            StressFamily::TwoDP2 => "2d-p2",
            StressFamily::ThreeDP3 => "3d-p3",
            StressFamily::ThreeDP2 => "3d-p2",
            StressFamily::ThreeDP2Flat => "3d-p2-flat",
        }
    }

    pub fn dim(self) -> usize {
        if self == StressFamily::TwoDP2 {
            2
        } else {
            3
        }
    }

    pub fn degree(self) -> usize {
        if self == StressFamily::ThreeDP3 {
            3
        } else {
            2
        }
    }

    pub fn split(self) -> SplitKind {
        match self {
            StressFamily::TwoDP2 => SplitKind::TwoDP2,
            StressFamily::ThreeDP3 => SplitKind::ThreeDP3,
            StressFamily::ThreeDP2 => SplitKind::ThreeDP2,
            StressFamily::ThreeDP2Flat => SplitKind::None,
        }
    }

    pub fn all() -> [StressFamily; 4] {
        [StressFamily::TwoDP2, StressFamily::ThreeDP3, StressFamily::ThreeDP2, StressFamily::ThreeDP2Flat]
    }
}

impl fmt::Display for StressFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StressFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StressFamily::all()
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown family {s}")))
    }
}

/// Restriction of one global basis function to one cell: `Phi_local * tensor`.
#[derive(Clone, Debug)]
pub struct LocalDof {
    pub dof: usize,
    /// Local lattice index in the cell.
    pub local: usize,
    /// Symmetric tensor components.
    pub tensor: [f64; 6],
}

#[derive(Clone, Debug)]
pub struct StressSpace {
    pub family: StressFamily,
    pub dim: usize,
    pub degree: usize,
    pub basis: LagrangeBasis,
    pub nodes: NodeMap,
    pub cell_dofs: Vec<Vec<LocalDof>>,
    pub dof_node: Vec<usize>,
    /// Dimension of the continuous vector-Lagrange part.
    pub n_continuous: usize,
    /// Number of non-continuous basis functions attributed to each macro.
    pub macro_bubbles: Vec<usize>,
}

#[derive(Serialize)]
pub struct SpaceSummary {
    pub family: StressFamily,
    pub n_dofs: usize,
    pub n_continuous: usize,
    pub n_bubble: usize,
    pub n_nodes: usize,
    pub macro_bubbles: Vec<usize>,
}

/// Generator of `W_X`: tensor values (components) on some incident cells.
/// Cellwise tensor values (components) at one node.
pub(crate) struct Generator {
    pub values: Vec<(usize, Vec<f64>)>,
}

impl StressSpace {
    pub fn n_dofs(&self) -> usize {
        self.dof_node.len()
    }

    pub fn summary(&self) -> SpaceSummary {
        SpaceSummary {
            family: self.family,
            n_dofs: self.n_dofs(),
            n_continuous: self.n_continuous,
            n_bubble: self.n_dofs() - self.n_continuous,
            n_nodes: self.nodes.len(),
            macro_bubbles: self.macro_bubbles.clone(),
        }
    }

    /// Builds the global stress space of `family` on a matching macro mesh.
    pub fn new(mm: &MacroMesh, family: StressFamily) -> Result<StressSpace> {
        if mm.kind != family.split() || mm.dim() != family.dim() {
            return Err(Error::InvalidInput(format!(
                "family {family} needs a {} split, got {}",
                family.split(),
                mm.kind
            )));
        }
        let mesh = &mm.fine;
        let dim = family.dim();
        let ns = n_sym(dim);
        let degree = family.degree();
        let basis = LagrangeBasis::new(dim, degree)?;
        let nodes = NodeMap::new(mesh, degree);
        let mut extra: Vec<Vec<Generator>> = (0..nodes.len()).map(|_| Vec::new()).collect();
        match family {
            StressFamily::TwoDP2 => macro_tangential_2d(mm, &nodes, &mut extra),
            StressFamily::ThreeDP3 => macro_tangential_3d(mm, &nodes, &mut extra),
            StressFamily::ThreeDP2 => macro_constrained_3d(mm, &nodes, &basis, &mut extra),
            StressFamily::ThreeDP2Flat => flat_constrained(mm, &nodes, &basis, &mut extra),
        }

        let mut cell_dofs: Vec<Vec<LocalDof>> = vec![Vec::new(); mesh.n_cells()];
        let mut dof_node = Vec::new();
        let mut macro_bubbles = vec![0; mm.macros.len()];
        let mut n_continuous = 0;
        for x in 0..nodes.len() {
            let inc = &nodes.node_cells[x];
            let m = inc.len();
            let pos: HashMap<usize, usize> = inc.iter().enumerate().map(|(j, &(c, _))| (c, j)).collect();
            let mut gens: Vec<Vec<f64>> = Vec::new();
            for c in 0..ns {
                let mut comp = vec![0.0; ns];
                comp[c] = 1.0;
                let mandel = tensor::to_mandel(dim, &comp);
                let mut g = vec![0.0; ns * m];
                for j in 0..m {
                    g[j * ns..(j + 1) * ns].copy_from_slice(&mandel);
                }
                gens.push(g);
            }
            for (j, &(c, l)) in inc.iter().enumerate() {
                for t in element_bubble_tensors(mm, &basis, c, l) {
                    let mut g = vec![0.0; ns * m];
                    g[j * ns..(j + 1) * ns].copy_from_slice(&t);
                    gens.push(g);
                }
            }
            for gen in &extra[x] {
                let mut g = vec![0.0; ns * m];
                for (c, t) in &gen.values {
                    let j = pos[c];
                    g[j * ns..(j + 1) * ns].copy_from_slice(&tensor::to_mandel(dim, t));
                }
                gens.push(g);
            }
            let chosen = greedy_select(&gens, SELECT_TOL);
            for (rank, g) in chosen.into_iter().enumerate() {
                let dof = dof_node.len();
                dof_node.push(x);
                if rank < ns {
                    n_continuous += 1;
                } else {
                    let first = inc.iter().enumerate().find(|(j, _)| {
                        g[j * ns..(j + 1) * ns].iter().any(|v| v.abs() > 1e-12)
                    });
                    if let Some((_, &(c, _))) = first {
                        macro_bubbles[mm.cell_macro[c]] += 1;
                    }
                }
                for (j, &(c, l)) in inc.iter().enumerate() {
                    let block = &g[j * ns..(j + 1) * ns];
                    if block.iter().all(|v| v.abs() <= 1e-13) {
                        continue;
                    }
                    let comps = tensor::from_mandel(dim, block);
                    let mut t = [0.0; 6];
                    t[..ns].copy_from_slice(&comps);
                    cell_dofs[c].push(LocalDof { dof, local: l, tensor: t });
                }
            }
        }
        Ok(StressSpace { family, dim, degree, basis, nodes, cell_dofs, dof_node, n_continuous, macro_bubbles })
    }

    /// Value (components) of the global field with coefficients `coef` in
    /// cell `c` at barycentric point `lam`.
    pub fn eval(&self, coef: &[f64], c: usize, lam: &[f64]) -> [f64; 6] {
        let phi = self.basis.values(lam);
        let mut out = [0.0; 6];
        for d in &self.cell_dofs[c] {
            let s = coef[d.dof] * phi[d.local];
            for k in 0..6 {
                out[k] += s * d.tensor[k];
            }
        }
        out
    }

    /// Divergence of the field in cell `c` at `lam`, given the cell's
    /// barycentric gradients.
    pub fn eval_div(&self, coef: &[f64], c: usize, lam: &[f64], grads: &[Point]) -> [f64; 3] {
        let dphi = self.basis.gradients(lam, grads);
        let mut out = [0.0; 3];
        for d in &self.cell_dofs[c] {
            let t = tensor::from_components(self.dim, &d.tensor[..n_sym(self.dim)]);
            let v = tensor::mat_vec(&t, &dphi[d.local]);
            for k in 0..3 {
                out[k] += coef[d.dof] * v[k];
            }
        }
        out
    }

    /// Single basis function as a coefficient vector.
    pub fn unit(&self, dof: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.n_dofs()];
        v[dof] = 1.0;
        v
    }
}

/// Picks generators that increase the rank, keeping the original vectors
/// (normalized) so that basis functions stay local.
fn greedy_select(gens: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for g in gens {
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut r: Vec<f64> = g.iter().map(|v| v / norm).collect();
        for _ in 0..2 {
            for b in &q {
                let d: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
        }
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn > tol {
            q.push(r.iter().map(|v| v / rn).collect());
            chosen.push(g.iter().map(|v| v / norm).collect());
        }
    }
    chosen
}

/// Mandel vectors spanning `{T : T n_F = 0 for all facets F of c through the node}`.
fn element_bubble_tensors(mm: &MacroMesh, basis: &LagrangeBasis, c: usize, l: usize) -> Vec<Vec<f64>> {
    let mesh = &mm.fine;
    let dim = mesh.dim;
    let mut cons = Constraints::new(dim, 1);
    for (i, &a) in basis.nodes[l].iter().enumerate() {
        if a == 0 {
            let n = mesh.facets[mesh.cell_facets[c][i]].normal;
            for r in traction_rows(dim, &n) {
                cons.add(&[(0, 1.0, &r)]);
            }
        }
    }
    let ns = nullspace(&cons.matrix(), NULL_TOL);
    (0..ns.ncols()).map(|k| ns.column(k).iter().copied().collect()).collect()
}

pub(crate) fn macro_tangential_2d(mm: &MacroMesh, nodes: &NodeMap, extra: &mut [Vec<Generator>]) {
    for m in &mm.macros {
        for (name, a, b) in [("m1", "x1", "x2"), ("m2", "x0", "x1"), ("m3", "x0", "x2")] {
            let v = m.node(name);
            let t = geom::normalize(&geom::sub(&m.point(b), &m.point(a)));
            let tt = tensor::to_components(2, &tensor::outer(&t, &t));
            let x = nodes.find(&[(v, 2)]).expect("macro vertex is a node");
            let values = nodes.node_cells[x]
                .iter()
                .filter(|(c, _)| mm.cell_macro[*c] == m.parent)
                .map(|&(c, _)| (c, tt.clone()))
                .collect();
            extra[x].push(Generator { values });
        }
    }
}

pub(crate) fn macro_tangential_3d(mm: &MacroMesh, nodes: &NodeMap, extra: &mut [Vec<Generator>]) {
    // Trisection nodes of the four bisection edges through m2, with the
    // macro face containing each edge. Both bisections are needed: either
    // half alone leaves div short of RM-perp by three dimensions.
    let entries = [
        ("x1", 2u8, 1u8, ["x0", "x1", "x2"]),
        ("x1", 1, 2, ["x0", "x1", "x2"]),
        ("x3", 2, 1, ["x0", "x2", "x3"]),
        ("x3", 1, 2, ["x0", "x2", "x3"]),
        ("m1", 2, 1, ["x0", "x2", "x3"]),
        ("m1", 1, 2, ["x0", "x2", "x3"]),
        ("m3", 2, 1, ["x0", "x1", "x2"]),
        ("m3", 1, 2, ["x0", "x1", "x2"]),
    ];
    for m in &mm.macros {
        let m2 = m.node("m2");
        for (a, ma, mb, face) in entries {
            let va = m.node(a);
            let t1 = geom::normalize(&geom::sub(&m.point("m2"), &m.point(a)));
            let pts: Vec<Point> = face.iter().map(|n| m.point(n)).collect();
            let n = geom::facet_normal(3, &pts);
            let t2 = geom::normalize(&geom::cross(&t1, &n));
            let tensors = [tensor::outer(&t2, &t2), tensor::sym_outer(&t1, &t2)];
            let x = nodes.find(&[(va, ma), (m2, mb)]).expect("trisection node exists");
            for t in tensors {
                let comps = tensor::to_components(3, &t);
                let values = nodes.node_cells[x]
                    .iter()
                    .filter(|(c, _)| mm.cell_macro[*c] == m.parent)
                    .map(|&(c, _)| (c, comps.clone()))
                    .collect();
                extra[x].push(Generator { values });
            }
        }
    }
}

/// Options of the node-local degree-2 constraint system in 3D.
pub(crate) struct NodalRules {
    /// Impose `tau n = 0` on facets through the node with only one cell in the set.
    pub h0: bool,
    /// The node is a vertex at which `tau` must vanish.
    pub zero_value: bool,
    /// The node is an edge midpoint at which the normal-plane block must vanish.
    pub zero_normal_block: bool,
}

/// Nullspace (Mandel block vectors over `cells`) of the degree-2 nodal
/// constraints at node `x`.
pub(crate) fn nodal_constrained_space(
    mm: &MacroMesh,
    nodes: &NodeMap,
    basis: &LagrangeBasis,
    x: usize,
    cells: &[(usize, usize)],
    rules: &NodalRules,
) -> DMatrix<f64> {
    let mesh = &mm.fine;
    let dim = mesh.dim;
    let pos: HashMap<usize, usize> = cells.iter().enumerate().map(|(j, &(c, _))| (c, j)).collect();
    let mut cons = Constraints::new(dim, cells.len());
    let mut seen = HashSet::new();
    for &(c, l) in cells {
        for (i, &a) in basis.nodes[l].iter().enumerate() {
            if a != 0 {
                continue;
            }
            let f = mesh.cell_facets[c][i];
            if !seen.insert(f) {
                continue;
            }
            let facet = &mesh.facets[f];
            let rows = traction_rows(dim, &facet.normal);
            let plus = pos.get(&facet.plus).copied();
            let minus = facet.minus.and_then(|m| pos.get(&m).copied());
            match (plus, minus) {
                (Some(p), Some(q)) => {
                    for r in &rows {
                        cons.add(&[(p, 1.0, r), (q, -1.0, r)]);
                    }
                }
                (Some(p), None) | (None, Some(p)) if rules.h0 => {
                    for r in &rows {
                        cons.add(&[(p, 1.0, r)]);
                    }
                }
                _ => {}
            }
        }
    }
    let support = nodes.support(x);
    let ns = n_sym(dim);
    let ident: Vec<Vec<f64>> = (0..ns)
        .map(|k| {
            let mut e = vec![0.0; ns];
            e[k] = 1.0;
            e
        })
        .collect();
    if support.len() == 1 {
        for j in 0..cells.len() {
            for e in &ident {
                if rules.zero_value {
                    cons.add(&[(j, 1.0, e)]);
                } else if j > 0 {
                    cons.add(&[(0, 1.0, e), (j, -1.0, e)]);
                }
            }
        }
    } else if support.len() == 2 && dim == 3 {
        let t = geom::normalize(&geom::sub(&mesh.vertices[support[1]], &mesh.vertices[support[0]]));
        let [n1, n2] = geom::normal_plane(&t);
        let rows = [bilinear_row(3, &n1, &n1), bilinear_row(3, &n2, &n2), bilinear_row(3, &n1, &n2)];
        for j in 0..cells.len() {
            for r in &rows {
                if rules.zero_normal_block {
                    cons.add(&[(j, 1.0, r)]);
                } else if j > 0 {
                    cons.add(&[(0, 1.0, r), (j, -1.0, r)]);
                }
            }
        }
    }
    nullspace(&cons.matrix(), NULL_TOL)
}

fn push_block_vectors(dim: usize, cells: &[(usize, usize)], ns_mat: &DMatrix<f64>, out: &mut Vec<Generator>) {
    let ns = n_sym(dim);
    for k in 0..ns_mat.ncols() {
        let col = ns_mat.column(k);
        let values = cells
            .iter()
            .enumerate()
            .map(|(j, &(c, _))| {
                let block: Vec<f64> = (0..ns).map(|i| col[j * ns + i]).collect();
                (c, tensor::from_mandel(dim, &block))
            })
            .collect();
        out.push(Generator { values });
    }
}

pub(crate) fn macro_constrained_3d(mm: &MacroMesh, nodes: &NodeMap, basis: &LagrangeBasis, extra: &mut [Vec<Generator>]) {
    for m in &mm.macros {
        let zero_vertices: HashSet<usize> = ["m1", "m2", "m3", "m4"].iter().map(|n| m.node(n)).collect();
        let mut face_edges: HashSet<[usize; 2]> = HashSet::new();
        for (i, f) in ["m1", "m2", "m3", "m4"].iter().enumerate() {
            let vf = m.node(f);
            for j in 0..4 {
                if j != i {
                    let xj = m.node(&format!("x{j}"));
                    face_edges.insert([vf.min(xj), vf.max(xj)]);
                }
            }
        }
        let mut macro_nodes: Vec<usize> = m.cells.iter().flat_map(|&c| nodes.cell_nodes[c].iter().copied()).collect();
        macro_nodes.sort_unstable();
        macro_nodes.dedup();
        for x in macro_nodes {
            let cells: Vec<(usize, usize)> = nodes.node_cells[x]
                .iter()
                .copied()
                .filter(|(c, _)| mm.cell_macro[*c] == m.parent)
                .collect();
            let support = nodes.support(x);
            let rules = NodalRules {
                h0: true,
                zero_value: support.len() == 1 && zero_vertices.contains(&support[0]),
                zero_normal_block: support.len() == 2 && face_edges.contains(&[support[0], support[1]]),
            };
            let space = nodal_constrained_space(mm, nodes, basis, x, &cells, &rules);
            push_block_vectors(3, &cells, &space, &mut extra[x]);
        }
    }
}

fn flat_constrained(mm: &MacroMesh, nodes: &NodeMap, basis: &LagrangeBasis, extra: &mut [Vec<Generator>]) {
    let rules = NodalRules { h0: false, zero_value: false, zero_normal_block: false };
    for x in 0..nodes.len() {
        let cells = nodes.node_cells[x].clone();
        let space = nodal_constrained_space(mm, nodes, basis, x, &cells, &rules);
        push_block_vectors(3, &cells, &space, &mut extra[x]);
    }
}
