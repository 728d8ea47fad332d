//! Macro-element splits of simplicial meshes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Mesh;
use crate::error::{Error, Result};
use crate::geom::{self, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitKind {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "2d-p2")]
    TwoDP2,
    #[serde(rename = "3d-p3")]
    ThreeDP3,
    #[serde(rename = "3d-p2")]
    ThreeDP2,
}

impl SplitKind {
    pub fn name(self) -> &'static str {
        match self {
            SplitKind::None => "none",
            SplitKind::TwoDP2 => "2d-p2",
            SplitKind::ThreeDP3 => "3d-p3",
            SplitKind::ThreeDP2 => "3d-p2",
        }
    }
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SplitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SplitKind::None),
            "2d-p2" => Ok(SplitKind::TwoDP2),
            "3d-p3" => Ok(SplitKind::ThreeDP3),
            "3d-p2" => Ok(SplitKind::ThreeDP2),
            _ => Err(Error::InvalidInput(format!("unknown split {s}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Macro {
    /// Cell of the coarse mesh this macro came from.
    pub parent: usize,
    /// Fine cells in labeled order (K1, K2, ...).
    pub cells: Vec<usize>,
    /// Fine facets interior to the macro, in labeled order.
    pub interior_facets: Vec<usize>,
    /// Named fine vertices (x0.., m1..).
    pub nodes: BTreeMap<String, usize>,
    /// Coordinates of every named point, including d_i and g_i.
    pub points: BTreeMap<String, Point>,
}

impl Macro {
    pub fn node(&self, name: &str) -> usize {
        self.nodes[name]
    }

    pub fn point(&self, name: &str) -> Point {
        self.points[name]
    }

    /// Coarse vertices x0..xn as fine vertex indices.
    pub fn corners(&self, dim: usize) -> Vec<usize> {
        (0..=dim).map(|i| self.nodes[&format!("x{i}")]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct MacroMesh {
    pub kind: SplitKind,
    pub coarse: Mesh,
    pub fine: Mesh,
    pub macros: Vec<Macro>,
    /// Macro index of every fine cell.
    pub cell_macro: Vec<usize>,
}

impl MacroMesh {
    pub fn dim(&self) -> usize {
        self.fine.dim
    }
}

/// Split pattern: named points as subsets of the labeled corners, sub-cells
/// and interior facets as lists of names, and extra named points as affine
/// combinations.
struct Pattern {
    vertices: Vec<(String, Vec<usize>)>,
    cells: Vec<Vec<&'static str>>,
    facets: Vec<Vec<&'static str>>,
    extra: Vec<(String, Vec<(&'static str, f64)>)>,
}

fn owned(v: &[(&str, &[usize])]) -> Vec<(String, Vec<usize>)> {
    v.iter().map(|(n, s)| (n.to_string(), s.to_vec())).collect()
}

fn pattern_2d() -> Pattern {
    Pattern {
        vertices: owned(&[
            ("x0", &[0]),
            ("x1", &[1]),
            ("x2", &[2]),
            ("m1", &[1, 2]),
            ("m2", &[0, 1]),
            ("m3", &[0, 2]),
        ]),
        cells: vec![
            vec!["x1", "m1", "m2"],
            vec!["x0", "m1", "m2"],
            vec!["x0", "m1", "m3"],
            vec!["x2", "m1", "m3"],
        ],
        facets: vec![vec!["m1", "m2"], vec!["m1", "x0"], vec!["m1", "m3"]],
        extra: vec![
            ("d1".into(), vec![("m1", 0.5), ("m2", 0.5)]),
            ("d2".into(), vec![("m1", 0.5), ("x0", 0.5)]),
            ("d3".into(), vec![("m1", 0.5), ("m3", 0.5)]),
        ],
    }
}

fn trisect(a: &'static str, b: &'static str) -> [Vec<(&'static str, f64)>; 2] {
    [vec![(a, 2.0 / 3.0), (b, 1.0 / 3.0)], vec![(a, 1.0 / 3.0), (b, 2.0 / 3.0)]]
}

fn pattern_3d_p3() -> Pattern {
    let third = 1.0 / 3.0;
    let mut extra = vec![
        ("d1".to_string(), vec![("x1", third), ("m1", third), ("m2", third)]),
        ("d2".to_string(), vec![("x1", third), ("x3", third), ("m2", third)]),
        ("d3".to_string(), vec![("x3", third), ("m2", third), ("m3", third)]),
    ];
    let edges = [("m1", "m2"), ("x1", "m2"), ("x3", "m2"), ("m2", "m3")];
    for (e, (a, b)) in edges.iter().enumerate() {
        let [p, q] = trisect(a, b);
        extra.push((format!("g{}", 2 * e + 1), p));
        extra.push((format!("g{}", 2 * e + 2), q));
    }
    Pattern {
        vertices: owned(&[
            ("x0", &[0]),
            ("x1", &[1]),
            ("x2", &[2]),
            ("x3", &[3]),
            ("m1", &[0, 3]),
            ("m2", &[0, 2]),
            ("m3", &[1, 2]),
        ]),
        cells: vec![
            vec!["x0", "x1", "m1", "m2"],
            vec!["x1", "x3", "m1", "m2"],
            vec!["x1", "x3", "m2", "m3"],
            vec!["x2", "x3", "m2", "m3"],
        ],
        facets: vec![vec!["x1", "m1", "m2"], vec!["x1", "x3", "m2"], vec!["x3", "m2", "m3"]],
        extra,
    }
}

fn pattern_3d_p2() -> Pattern {
    const X: [&str; 4] = ["x0", "x1", "x2", "x3"];
    const M: [&str; 4] = ["m1", "m2", "m3", "m4"];
    let mut vertices: Vec<(String, Vec<usize>)> = (0..4).map(|i| (X[i].to_string(), vec![i])).collect();
    for i in 0..4 {
        let face: Vec<usize> = (0..4).filter(|&j| j != i).collect();
        vertices.push((M[i].to_string(), face));
    }
    vertices.push(("m5".to_string(), vec![0, 1, 2, 3]));
    let mut cells = Vec::new();
    let mut facets = Vec::new();
    for i in 0..4 {
        let f: Vec<&str> = (0..4).filter(|&j| j != i).map(|j| X[j]).collect();
        cells.push(vec![f[0], f[1], M[i], "m5"]);
        cells.push(vec![f[1], f[2], M[i], "m5"]);
        cells.push(vec![f[0], f[2], M[i], "m5"]);
        for v in &f {
            facets.push(vec![*v, M[i], "m5"]);
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            facets.push(vec![X[i], X[j], "m5"]);
        }
    }
    let mut extra = Vec::new();
    for (k, name) in X.iter().chain(M.iter()).enumerate() {
        extra.push((format!("g{}", k + 1), vec![(*name, 0.5), ("m5", 0.5)]));
    }
    Pattern { vertices, cells, facets, extra }
}

fn pattern_none(dim: usize) -> Pattern {
    let names: [&'static str; 4] = ["x0", "x1", "x2", "x3"];
    Pattern {
        vertices: (0..=dim).map(|i| (names[i].to_string(), vec![i])).collect(),
        cells: vec![names[..=dim].to_vec()],
        facets: vec![],
        extra: vec![],
    }
}

/// Corner labeling: returns coarse vertex ids in the order (x0, x1, ...).
fn label_corners(kind: SplitKind, mesh: &Mesh, cell: &[usize]) -> Vec<usize> {
    let mut sorted = cell.to_vec();
    sorted.sort_unstable();
    match kind {
        SplitKind::TwoDP2 => {
            // x0 is opposite the longest edge; ties go to the lowest index.
            let len = |a: usize, b: usize| geom::norm(&geom::sub(&mesh.vertices[a], &mesh.vertices[b]));
            let opposite: Vec<f64> = sorted
                .iter()
                .map(|&v| {
                    let o: Vec<usize> = sorted.iter().copied().filter(|&w| w != v).collect();
                    len(o[0], o[1])
                })
                .collect();
            let lmax = opposite.iter().cloned().fold(0.0, f64::max);
            let apex = sorted
                .iter()
                .zip(&opposite)
                .find(|(_, &l)| l >= lmax * (1.0 - 1e-12))
                .map(|(&v, _)| v)
                .unwrap();
            let mut out = vec![apex];
            out.extend(sorted.iter().copied().filter(|&v| v != apex));
            out
        }
        // x2 carries the largest index so that the first bisection edge
        // x0x2 joins the smallest and largest vertex.
        SplitKind::ThreeDP3 => vec![sorted[0], sorted[1], sorted[3], sorted[2]],
        SplitKind::ThreeDP2 | SplitKind::None => sorted,
    }
}

/// Applies a macro split to every cell of `mesh`.
pub fn macro_split(mesh: &Mesh, kind: SplitKind) -> Result<MacroMesh> {
    let pattern = match (kind, mesh.dim) {
        (SplitKind::TwoDP2, 2) => pattern_2d(),
        (SplitKind::ThreeDP3, 3) => pattern_3d_p3(),
        (SplitKind::ThreeDP2, 3) => pattern_3d_p2(),
        (SplitKind::None, d) => pattern_none(d),
        _ => return Err(Error::InvalidInput(format!("split {kind} on a {}D mesh", mesh.dim))),
    };
    let mut vertices = mesh.vertices.clone();
    let mut key_index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut cells = Vec::new();
    let mut labeled = Vec::with_capacity(mesh.n_cells());
    for (c, cell) in mesh.cells.iter().enumerate() {
        if mesh.volume(c) <= 0.0 {
            return Err(Error::DegenerateCell(c));
        }
        let corners = label_corners(kind, mesh, cell);
        let mut names: BTreeMap<String, usize> = BTreeMap::new();
        for (name, subset) in &pattern.vertices {
            let mut key: Vec<usize> = subset.iter().map(|&i| corners[i]).collect();
            key.sort_unstable();
            let id = if key.len() == 1 {
                key[0]
            } else {
                *key_index.entry(key.clone()).or_insert_with(|| {
                    let pts: Vec<Point> = key.iter().map(|&v| mesh.vertices[v]).collect();
                    vertices.push(geom::centroid(&pts));
                    vertices.len() - 1
                })
            };
            names.insert(name.clone(), id);
        }
        for sub in &pattern.cells {
            cells.push(sub.iter().map(|n| names[*n]).collect::<Vec<usize>>());
        }
        labeled.push(names);
    }
    let fine = Mesh::new(mesh.dim, vertices, cells)?;
    let coarse_boundary = mesh.boundary_measure();
    if (fine.boundary_measure() - coarse_boundary).abs() > 1e-10 * coarse_boundary.max(1.0) {
        return Err(Error::NonConforming(format!("{kind} split creates hanging facets")));
    }
    let mut facet_index: HashMap<&[usize], usize> = HashMap::new();
    for (f, facet) in fine.facets.iter().enumerate() {
        facet_index.insert(&facet.vertices, f);
    }
    let per = pattern.cells.len();
    let mut macros = Vec::with_capacity(mesh.n_cells());
    for (c, names) in labeled.into_iter().enumerate() {
        let interior_facets = pattern
            .facets
            .iter()
            .map(|f| {
                let mut key: Vec<usize> = f.iter().map(|n| names[*n]).collect();
                key.sort_unstable();
                facet_index[key.as_slice()]
            })
            .collect();
        let mut points: BTreeMap<String, Point> =
            names.iter().map(|(n, &v)| (n.clone(), fine.vertices[v])).collect();
        for (name, combo) in &pattern.extra {
            let mut p = [0.0; 3];
            for (n, w) in combo {
                p = geom::add(&p, &geom::scale(&points[*n], *w));
            }
            points.insert(name.clone(), p);
        }
        macros.push(Macro {
            parent: c,
            cells: (c * per..(c + 1) * per).collect(),
            interior_facets,
            nodes: names,
            points,
        });
    }
    let cell_macro = (0..fine.n_cells()).map(|k| k / per).collect();
    Ok(MacroMesh { kind, coarse: mesh.clone(), fine, macros, cell_macro })
}

pub fn macro_split_2d(mesh: &Mesh) -> Result<MacroMesh> {
    macro_split(mesh, SplitKind::TwoDP2)
}

pub fn macro_split_3d_p3(mesh: &Mesh) -> Result<MacroMesh> {
    macro_split(mesh, SplitKind::ThreeDP3)
}

pub fn macro_split_3d_p2(mesh: &Mesh) -> Result<MacroMesh> {
    macro_split(mesh, SplitKind::ThreeDP2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_cube_mesh, unit_square_mesh};

    fn reference(dim: usize) -> Mesh {
        let mut v = vec![[0.0; 3]];
        for i in 0..dim {
            let mut p = [0.0; 3];
            p[i] = 1.0;
            v.push(p);
        }
        Mesh::new(dim, v, vec![(0..=dim).collect()]).unwrap()
    }

    fn close(a: Point, b: Point) -> bool {
        geom::norm(&geom::sub(&a, &b)) < 1e-12
    }

    fn check_partition(mm: &MacroMesh) {
        for m in &mm.macros {
            let v: f64 = m.cells.iter().map(|&c| mm.fine.volume(c)).sum();
            assert!((v - mm.coarse.volume(m.parent)).abs() < 1e-12 * v);
            for &f in &m.interior_facets {
                let facet = &mm.fine.facets[f];
                assert!(m.cells.contains(&facet.plus));
                assert!(m.cells.contains(&facet.minus.unwrap()));
            }
        }
        assert!((mm.fine.total_volume() - mm.coarse.total_volume()).abs() < 1e-12);
    }

    #[test]
    fn reference_triangle_labels() {
        let mm = macro_split_2d(&reference(2)).unwrap();
        let m = &mm.macros[0];
        // The longest edge of the reference triangle is (1,0)-(0,1).
        assert!(close(m.point("x0"), [0.0, 0.0, 0.0]));
        let e2 = &mm.fine.facets[m.interior_facets[1]];
        let ends: Vec<Point> = e2.vertices.iter().map(|&v| mm.fine.vertices[v]).collect();
        assert!(ends.iter().any(|p| close(*p, [0.5, 0.5, 0.0])));
        assert!(ends.iter().any(|p| close(*p, [0.0, 0.0, 0.0])));
        assert!(close(m.point("d2"), [0.25, 0.25, 0.0]));
        check_partition(&mm);
    }

    #[test]
    fn square_macro_mesh() {
        let mm = macro_split_2d(&unit_square_mesh(1)).unwrap();
        assert_eq!((mm.fine.n_cells(), mm.macros.len()), (8, 2));
        check_partition(&mm);
        let mm = macro_split_2d(&unit_square_mesh(3)).unwrap();
        check_partition(&mm);
        // Apex sits opposite the diagonal of each grid triangle.
        for m in &mm.macros {
            let (a, b, c) = (m.point("x0"), m.point("x1"), m.point("x2"));
            assert!(geom::dot(&geom::sub(&b, &a), &geom::sub(&c, &a)).abs() < 1e-14);
        }
    }

    #[test]
    fn p3_split() {
        let mm = macro_split_3d_p3(&reference(3)).unwrap();
        for &c in &mm.macros[0].cells {
            assert!((mm.fine.volume(c) - 1.0 / 24.0).abs() < 1e-15);
        }
        let m = &mm.macros[0];
        let (m1, m2) = (m.point("m1"), m.point("m2"));
        assert!(close(m.point("g1"), geom::add(&geom::scale(&m1, 2.0 / 3.0), &geom::scale(&m2, 1.0 / 3.0))));
        assert!(close(m.point("g2"), geom::add(&geom::scale(&m1, 1.0 / 3.0), &geom::scale(&m2, 2.0 / 3.0))));
        assert!(close(m2, geom::centroid(&[m.point("x0"), m.point("x2")])));
        let mm = macro_split_3d_p3(&unit_cube_mesh(2)).unwrap();
        check_partition(&mm);
        assert_eq!(macro_split_3d_p3(&unit_cube_mesh(1)).unwrap().fine.n_cells(), 24);
    }

    #[test]
    fn p2_split() {
        let mm = macro_split_3d_p2(&reference(3)).unwrap();
        assert_eq!(mm.fine.n_cells(), 12);
        assert_eq!(mm.macros[0].interior_facets.len(), 18);
        check_partition(&mm);
        let m = &mm.macros[0];
        assert!(close(m.point("m4"), geom::centroid(&[m.point("x0"), m.point("x1"), m.point("x2")])));
        assert!(close(m.point("m5"), [0.25, 0.25, 0.25]));
        let mm = macro_split_3d_p2(&unit_cube_mesh(2)).unwrap();
        check_partition(&mm);
        assert_eq!(macro_split_3d_p2(&unit_cube_mesh(1)).unwrap().fine.n_cells(), 72);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        assert!(macro_split_2d(&unit_cube_mesh(1)).is_err());
        assert!(macro_split_3d_p3(&unit_square_mesh(1)).is_err());
    }

    #[test]
    fn split_names_round_trip() {
        for k in [SplitKind::None, SplitKind::TwoDP2, SplitKind::ThreeDP3, SplitKind::ThreeDP2] {
            assert_eq!(k.name().parse::<SplitKind>().unwrap(), k);
        }
    }
}
