//! H(div; S) bubble spaces on single cells and on macro-elements.
//!
//! Element bubbles and the 3D degree-2 macro bubbles are nullspaces of
//! nodal constraint systems; the 2D degree-2 and 3D degree-3 macro bubbles
//! are built from their explicit spanning sets. Every basis is returned
//! L^2-orthonormal.

use std::collections::{BTreeSet, HashSet};

use nalgebra::DMatrix;

use super::constraints::{bilinear_row, traction_rows, Constraints};
use super::nodes::NodeMap;
use super::piecewise::{orthonormalize, PiecewisePoly};
use super::stress::{macro_tangential_2d, macro_tangential_3d, Generator, StressFamily};
use crate::assembly::{simplex_quadrature, RefTables};
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::{MacroMesh, Mesh};
use crate::poly::LagrangeBasis;
use crate::solver::dense::nullspace;
use crate::tensor::{self, n_sym};

const NULL_TOL: f64 = 1e-10;
const GRAM_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct BubbleSpace {
    /// `None` for a single-cell space.
    pub family: Option<StressFamily>,
    pub macro_index: Option<usize>,
    pub cells: Vec<usize>,
    pub degree: usize,
    /// Size of the spanning set (or constraint unknowns) before reduction.
    pub generators: usize,
    pub basis: Vec<PiecewisePoly>,
}

impl BubbleSpace {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Largest `|tau n|` over quadrature points of the facets of `mesh`
    /// that bound the union of `cells`.
    pub fn boundary_trace_residual(&self, mesh: &Mesh) -> f64 {
        let inside: HashSet<usize> = self.cells.iter().copied().collect();
        let basis = LagrangeBasis::new(mesh.dim, self.degree).expect("supported degree");
        let rule = simplex_quadrature(mesh.dim - 1, 2 * self.degree).expect("supported rule");
        let mut worst: f64 = 0.0;
        for (j, &c) in self.cells.iter().enumerate() {
            for (i, &f) in mesh.cell_facets[c].iter().enumerate() {
                let facet = &mesh.facets[f];
                let other = if facet.plus == c { facet.minus } else { Some(facet.plus) };
                if other.is_some_and(|o| inside.contains(&o)) {
                    continue;
                }
                for q in &rule.points {
                    // Facet barycentrics embedded with a zero at local vertex i.
                    let mut lam = Vec::with_capacity(mesh.dim + 1);
                    let mut it = q.iter();
                    for v in 0..=mesh.dim {
                        lam.push(if v == i { 0.0 } else { *it.next().unwrap() });
                    }
                    for p in &self.basis {
                        let t = tensor::from_components(mesh.dim, &p.eval(&basis, j, &lam));
                        let tn = tensor::mat_vec(&t, &facet.normal);
                        worst = worst.max(geom::norm(&tn));
                    }
                }
            }
        }
        worst
    }

    /// `B_div`: rows are the displacement unknowns of `cells` in the layout
    /// `(cell, node, component)`, columns the basis.
    pub fn divergence_matrix(&self, mesh: &Mesh, tables: &RefTables) -> DMatrix<f64> {
        let dim = mesh.dim;
        let nl = tables.disp.len() * dim;
        let mut b = DMatrix::zeros(self.cells.len() * nl, self.basis.len());
        for (col, p) in self.basis.iter().enumerate() {
            for j in 0..self.cells.len() {
                let m = p.div_moments(mesh, tables, j);
                for (r, v) in m.into_iter().enumerate() {
                    b[(j * nl + r, col)] = v;
                }
            }
        }
        b
    }
}

/// Mandel vectors over the nodes of one cell with `tau n = 0` on every facet.
fn element_bubble_vectors(basis: &LagrangeBasis, normals: &[Point]) -> DMatrix<f64> {
    let dim = basis.dim;
    let mut cons = Constraints::new(dim, basis.len());
    for (l, a) in basis.nodes.iter().enumerate() {
        for (i, n) in normals.iter().enumerate() {
            if a[i] == 0 {
                for r in traction_rows(dim, n) {
                    cons.add(&[(l, 1.0, &r)]);
                }
            }
        }
    }
    nullspace(&cons.matrix(), NULL_TOL)
}

fn reference_normals(dim: usize) -> Vec<Point> {
    let mut pts = vec![[0.0; 3]];
    for i in 0..dim {
        let mut p = [0.0; 3];
        p[i] = 1.0;
        pts.push(p);
    }
    (0..=dim)
        .map(|i| {
            let g = geom::bary_gradients(dim, &pts)[i];
            geom::scale(&geom::normalize(&g), -1.0)
        })
        .collect()
}

fn mandel_columns_to_poly(dim: usize, degree: usize, cells: Vec<usize>, block_of: &dyn Fn(usize) -> (usize, usize), col: &[f64]) -> PiecewisePoly {
    let ns = n_sym(dim);
    let mut p = PiecewisePoly::zeros(dim, degree, ns, cells);
    for b in 0..col.len() / ns {
        let block = &col[b * ns..(b + 1) * ns];
        if block.iter().all(|v| *v == 0.0) {
            continue;
        }
        let (j, l) = block_of(b);
        p.set_node_value(j, l, &tensor::from_mandel(dim, block));
    }
    p
}

/// `{tau in P_k(K; S) : tau n = 0 on the boundary of K}` for cell `cell`.
pub fn element_bubble_space(mesh: &Mesh, cell: usize, k: usize) -> Result<BubbleSpace> {
    if k < 2 {
        return Err(Error::UnsupportedDegree(k));
    }
    let dim = mesh.dim;
    let basis = LagrangeBasis::new(dim, k)?;
    let normals: Vec<Point> = mesh.cell_facets[cell].iter().map(|&f| mesh.facets[f].normal).collect();
    let ns_mat = element_bubble_vectors(&basis, &normals);
    let expected = element_bubble_vectors(&basis, &reference_normals(dim)).ncols();
    if ns_mat.ncols() != expected {
        return Err(Error::InconsistentBubbleDimension { expected, found: ns_mat.ncols() });
    }
    let polys: Vec<PiecewisePoly> = (0..ns_mat.ncols())
        .map(|c| mandel_columns_to_poly(dim, k, vec![cell], &|b| (0, b), ns_mat.column(c).as_slice()))
        .collect();
    let tables = RefTables::new(dim, k)?;
    let basis = orthonormalize(&polys, mesh, &tables.smass, GRAM_TOL);
    Ok(BubbleSpace { family: None, macro_index: None, cells: vec![cell], degree: k, generators: polys.len(), basis })
}

/// Spanning-set generator: `(cell, local node, tensor components)` triples.
type Terms = Vec<(usize, usize, Vec<f64>)>;

fn terms_to_poly(dim: usize, degree: usize, cells: &[usize], terms: &Terms) -> PiecewisePoly {
    let mut p = PiecewisePoly::zeros(dim, degree, n_sym(dim), cells.to_vec());
    for (c, l, t) in terms {
        let j = p.position(*c).expect("term inside the macro");
        p.set_node_value(j, *l, t);
    }
    p
}

fn node_terms(nodes: &NodeMap, x: usize, cells: &HashSet<usize>, t: &[f64]) -> Terms {
    nodes.node_cells[x]
        .iter()
        .filter(|(c, _)| cells.contains(c))
        .map(|&(c, l)| (c, l, t.to_vec()))
        .collect()
}

/// Macro bubble space of macro `index` of `mm`.
pub fn macro_bubble_space(mm: &MacroMesh, index: usize, family: StressFamily) -> Result<BubbleSpace> {
    if mm.kind != family.split() || family == StressFamily::ThreeDP2Flat {
        return Err(Error::InvalidInput(format!("no macro bubbles for {family} on a {} split", mm.kind)));
    }
    let m = mm.macros.get(index).ok_or_else(|| Error::InvalidInput(format!("no macro {index}")))?;
    let dim = family.dim();
    let k = family.degree();
    let tables = RefTables::new(dim, k)?;
    let nodes = NodeMap::new(&mm.fine, k);
    let polys = match family {
        StressFamily::ThreeDP2 => constrained_p2_bubbles(mm, index, &nodes, &tables.stress),
        _ => spanning_set(mm, index, family, &nodes)?,
    };
    let basis = orthonormalize(&polys, &mm.fine, &tables.smass, GRAM_TOL);
    if basis.is_empty() {
        return Err(Error::EmptyBubbleBasis);
    }
    Ok(BubbleSpace {
        family: Some(family),
        macro_index: Some(index),
        cells: m.cells.clone(),
        degree: k,
        generators: polys.len(),
        basis,
    })
}

/// Element bubbles, continuous fields at interior facet centroids, and the
/// tangential macro additions.
fn spanning_set(mm: &MacroMesh, index: usize, family: StressFamily, nodes: &NodeMap) -> Result<Vec<PiecewisePoly>> {
    let m = &mm.macros[index];
    let mesh = &mm.fine;
    let dim = family.dim();
    let k = family.degree();
    let inside: HashSet<usize> = m.cells.iter().copied().collect();
    let mut out = Vec::new();
    for &c in &m.cells {
        for b in element_bubble_space(mesh, c, k)?.basis {
            let terms: Terms = (0..b.values[0].len() / b.ncomp)
                .map(|l| (c, l, b.node_value(0, l).to_vec()))
                .collect();
            out.push(terms_to_poly(dim, k, &m.cells, &terms));
        }
    }
    for &f in &m.interior_facets {
        let facet = &mesh.facets[f];
        let key: Vec<(usize, u8)> = facet.vertices.iter().map(|&v| (v, 1)).collect();
        let x = nodes.find(&key).ok_or_else(|| Error::InvalidInput("facet centroid is not a node".into()))?;
        let n = facet.normal;
        let tangents: Vec<Point> =
            if dim == 2 { vec![[-n[1], n[0], 0.0]] } else { geom::normal_plane(&n).to_vec() };
        let mut tensors: Vec<Vec<f64>> = tangents
            .iter()
            .map(|t| tensor::to_components(dim, &tensor::sym_outer(t, &n)))
            .collect();
        tensors.push(tensor::to_components(dim, &tensor::outer(&n, &n)));
        for t in tensors {
            out.push(terms_to_poly(dim, k, &m.cells, &node_terms(nodes, x, &inside, &t)));
        }
    }
    let mut extra: Vec<Vec<Generator>> = (0..nodes.len()).map(|_| Vec::new()).collect();
    match family {
        StressFamily::TwoDP2 => macro_tangential_2d(mm, nodes, &mut extra),
        _ => macro_tangential_3d(mm, nodes, &mut extra),
    }
    for (x, gens) in extra.iter().enumerate() {
        for g in gens {
            if !g.values.iter().all(|(c, _)| inside.contains(c)) {
                continue;
            }
            let terms: Terms = g
                .values
                .iter()
                .map(|(c, t)| {
                    let l = nodes.node_cells[x].iter().find(|(cc, _)| cc == c).unwrap().1;
                    (*c, l, t.clone())
                })
                .collect();
            out.push(terms_to_poly(dim, k, &m.cells, &terms));
        }
    }
    Ok(out)
}

/// Nullspace of the full constraint system of the 3D degree-2 macro
/// bubbles over all nodal values of the twelve cells.
fn constrained_p2_bubbles(mm: &MacroMesh, index: usize, nodes: &NodeMap, basis: &LagrangeBasis) -> Vec<PiecewisePoly> {
    let m = &mm.macros[index];
    let mesh = &mm.fine;
    let nl = basis.len();
    let pos = |c: usize| m.cells.iter().position(|&x| x == c);
    let block = |c: usize, l: usize| pos(c).map(|j| j * nl + l);
    let mut cons = Constraints::new(3, m.cells.len() * nl);

    // Normal continuity on interior facets, zero traction on the boundary.
    let facets: BTreeSet<usize> = m.cells.iter().flat_map(|&c| mesh.cell_facets[c].iter().copied()).collect();
    for f in facets {
        let facet = &mesh.facets[f];
        let rows = traction_rows(3, &facet.normal);
        // The facet's own cell may belong to a neighbouring macro.
        let (p, q) = match facet.minus {
            Some(q) if pos(facet.plus).is_none() => (q, None),
            other => (facet.plus, other.filter(|&q| pos(q).is_some())),
        };
        let ip = mesh.cell_facets[p].iter().position(|&g| g == f).unwrap();
        for l in 0..nl {
            if basis.nodes[l][ip] != 0 {
                continue;
            }
            let bp = match block(p, l) {
                Some(b) => b,
                None => continue,
            };
            match q {
                Some(q) => {
                    let x = nodes.cell_nodes[p][l];
                    let lq = nodes.node_cells[x].iter().find(|(c, _)| *c == q).unwrap().1;
                    let bq = block(q, lq).unwrap();
                    for r in &rows {
                        cons.add(&[(bp, 1.0, r), (bq, -1.0, r)]);
                    }
                }
                None => {
                    for r in &rows {
                        cons.add(&[(bp, 1.0, r)]);
                    }
                }
            }
        }
    }

    let zero_vertices: HashSet<usize> = ["m1", "m2", "m3", "m4"].iter().map(|n| m.node(n)).collect();
    let mut face_edges: HashSet<[usize; 2]> = HashSet::new();
    for (i, f) in ["m1", "m2", "m3", "m4"].iter().enumerate() {
        for j in (0..4).filter(|&j| j != i) {
            let (a, b) = (m.node(f), m.node(&format!("x{j}")));
            face_edges.insert([a.min(b), a.max(b)]);
        }
    }
    let ident: Vec<Vec<f64>> = (0..6)
        .map(|i| {
            let mut e = vec![0.0; 6];
            e[i] = 1.0;
            e
        })
        .collect();
    let macro_nodes: BTreeSet<usize> = m.cells.iter().flat_map(|&c| nodes.cell_nodes[c].iter().copied()).collect();
    for x in macro_nodes {
        let blocks: Vec<usize> = nodes.node_cells[x].iter().filter_map(|&(c, l)| block(c, l)).collect();
        let support = nodes.support(x);
        let rows: Vec<Vec<f64>> = match support.len() {
            1 => ident.clone(),
            2 => {
                let t = geom::normalize(&geom::sub(&mesh.vertices[support[1]], &mesh.vertices[support[0]]));
                let [n1, n2] = geom::normal_plane(&t);
                vec![bilinear_row(3, &n1, &n1), bilinear_row(3, &n2, &n2), bilinear_row(3, &n1, &n2)]
            }
            _ => continue,
        };
        let vanish = match support.len() {
            1 => zero_vertices.contains(&support[0]),
            _ => face_edges.contains(&[support[0], support[1]]),
        };
        for (i, &b) in blocks.iter().enumerate() {
            for r in &rows {
                if vanish {
                    cons.add(&[(b, 1.0, r)]);
                } else if i > 0 {
                    cons.add(&[(blocks[0], 1.0, r), (b, -1.0, r)]);
                }
            }
        }
    }
    let ns_mat = nullspace(&cons.matrix(), NULL_TOL);
    (0..ns_mat.ncols())
        .map(|k| mandel_columns_to_poly(3, 2, m.cells.clone(), &|b| (b / nl, b % nl), ns_mat.column(k).as_slice()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{macro_split, Mesh, SplitKind};
    use crate::spaces::{rm_perp_basis, CellVectorBasis};

    fn reference(dim: usize) -> Mesh {
        let mut v = vec![[0.0; 3]];
        for i in 0..dim {
            let mut p = [0.0; 3];
            p[i] = 1.0;
            v.push(p);
        }
        Mesh::new(dim, v, vec![(0..=dim).collect()]).unwrap()
    }

    #[test]
    fn element_bubble_dimensions() {
        let tri = Mesh::new(2, vec![[0.1, 0.0, 0.0], [1.3, 0.2, 0.0], [0.4, 0.9, 0.0]], vec![vec![0, 1, 2]]).unwrap();
        let b = element_bubble_space(&tri, 0, 2).unwrap();
        assert_eq!(b.len(), 3);
        assert!(b.boundary_trace_residual(&tri) < 1e-12);
        let tet = reference(3);
        // One tangential tensor per edge node, three per face node.
        assert_eq!(element_bubble_space(&tet, 0, 3).unwrap().len(), 6 * 2 + 4 * 3);
        assert!(matches!(element_bubble_space(&tri, 0, 1), Err(Error::UnsupportedDegree(1))));
    }

    #[test]
    fn element_bubbles_are_orthogonal_to_rigid_motions() {
        let tri = reference(2);
        let b = element_bubble_space(&tri, 0, 2).unwrap();
        let tables = RefTables::new(2, 2).unwrap();
        let vb = CellVectorBasis::new(2, 1, vec![0]);
        let rm = vb.rigid_motions(&tri);
        let d = b.divergence_matrix(&tri, &tables);
        assert!((rm.transpose() * &d).amax() < 1e-12);
        // div maps onto RM-perp: rank = 6 - 3.
        assert_eq!(crate::solver::dense::dense_rank(&d, 1e-9), 3);
        let perp = rm_perp_basis(&tri, &vb, &tables);
        assert_eq!(perp.ncols(), 3);
    }

    #[test]
    fn macro_bubbles_have_zero_trace() {
        for (dim, kind, family) in [
            (2, SplitKind::TwoDP2, StressFamily::TwoDP2),
            (3, SplitKind::ThreeDP3, StressFamily::ThreeDP3),
            (3, SplitKind::ThreeDP2, StressFamily::ThreeDP2),
        ] {
            let mm = macro_split(&reference(dim), kind).unwrap();
            let b = macro_bubble_space(&mm, 0, family).unwrap();
            assert!(b.boundary_trace_residual(&mm.fine) < 1e-10, "{family}");
        }
    }

    #[test]
    fn every_macro_of_a_mesh_gets_the_same_space() {
        // Macros after the first meet facets owned by a neighbouring macro.
        let mm = macro_split(&crate::mesh::unit_cube_mesh(1), SplitKind::ThreeDP2).unwrap();
        for index in 0..mm.macros.len() {
            let b = macro_bubble_space(&mm, index, StressFamily::ThreeDP2).unwrap();
            assert_eq!(b.len(), 156, "macro {index}");
            assert!(b.boundary_trace_residual(&mm.fine) < 1e-10, "macro {index}");
        }
    }

    #[test]
    fn two_d_spanning_set_counts() {
        let mm = macro_split(&reference(2), SplitKind::TwoDP2).unwrap();
        let b = macro_bubble_space(&mm, 0, StressFamily::TwoDP2).unwrap();
        assert_eq!(b.generators, 4 * 3 + 6 + 3);
    }

    #[test]
    fn flat_family_has_no_macro_bubbles() {
        let mm = macro_split(&reference(3), SplitKind::None).unwrap();
        assert!(macro_bubble_space(&mm, 0, StressFamily::ThreeDP2Flat).is_err());
    }
}
