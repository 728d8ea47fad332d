//! Simplicial meshes of the unit square and cube, plus macro-element splits.

mod io;
mod split;

use std::collections::HashMap;

pub use io::{MacroRecord, MeshFile};
pub use split::{
    macro_split, macro_split_2d, macro_split_3d_p2, macro_split_3d_p3, Macro, MacroMesh, SplitKind,
};

use crate::error::{Error, Result};
use crate::geom::{self, Point};

/// Absolute tolerance for coordinate comparisons on unit-scale domains.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Facet {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// `K+`; the normal points out of this cell.
    pub plus: usize,
    /// `K-`, absent on the boundary.
    pub minus: Option<usize>,
    pub normal: Point,
    pub measure: f64,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<Point>,
    pub cells: Vec<Vec<usize>>,
    pub facets: Vec<Facet>,
    /// `cell_facets[c][i]` is the facet of cell `c` opposite its local vertex `i`.
    pub cell_facets: Vec<Vec<usize>>,
    volumes: Vec<f64>,
}

impl Mesh {
    /// Builds a mesh, reorienting cells to positive volume and deriving facets.
    pub fn new(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Mesh> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidInput(format!("dimension {dim}")));
        }
        let mut cells = cells;
        let mut volumes = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.len() != dim + 1 || cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidInput(format!("cell {c} has bad vertex list")));
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let vol = geom::signed_volume(dim, &pts);
            let scale = pts.iter().skip(1).map(|p| geom::norm(&geom::sub(p, &pts[0]))).fold(0.0, f64::max);
            if vol.abs() <= 1e-12 * scale.powi(dim as i32) {
                return Err(Error::DegenerateCell(c));
            }
            if vol < 0.0 {
                cell.swap(0, 1);
            }
            volumes.push(vol.abs());
        }
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut facets: Vec<Facet> = Vec::new();
        let mut cell_facets = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut cf = Vec::with_capacity(dim + 1);
            for i in 0..=dim {
                let mut key: Vec<usize> =
                    cell.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                key.sort_unstable();
                let f = match index.get(&key) {
                    Some(&f) => {
                        if facets[f].minus.is_some() {
                            return Err(Error::NonConforming(format!(
                                "facet {key:?} shared by more than two cells"
                            )));
                        }
                        facets[f].minus = Some(c);
                        f
                    }
                    None => {
                        let pts: Vec<Point> = key.iter().map(|&v| vertices[v]).collect();
                        let mut normal = geom::facet_normal(dim, &pts);
                        let out = geom::sub(&geom::centroid(&pts), &vertices[cell[i]]);
                        if geom::dot(&normal, &out) < 0.0 {
                            normal = geom::scale(&normal, -1.0);
                        }
                        let measure = geom::facet_measure(dim, &pts);
                        facets.push(Facet { vertices: key.clone(), plus: c, minus: None, normal, measure });
                        index.insert(key, facets.len() - 1);
                        facets.len() - 1
                    }
                };
                cf.push(f);
            }
            cell_facets.push(cf);
        }
        Ok(Mesh { dim, vertices, cells, facets, cell_facets, volumes })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn volume(&self, c: usize) -> f64 {
        self.volumes[c]
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn bary_gradients(&self, c: usize) -> Vec<Point> {
        geom::bary_gradients(self.dim, &self.cell_points(c))
    }

    pub fn boundary_measure(&self) -> f64 {
        self.facets.iter().filter(|f| f.is_boundary()).map(|f| f.measure).sum()
    }

    /// All edges as sorted vertex pairs, in first-appearance order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for cell in &self.cells {
            for i in 0..cell.len() {
                for j in i + 1..cell.len() {
                    let e = [cell[i].min(cell[j]), cell[i].max(cell[j])];
                    if seen.insert(e, ()).is_none() {
                        out.push(e);
                    }
                }
            }
        }
        out
    }

    /// Jump `v+ - v-` of a cellwise scalar across facet `f` (zero exterior value
    /// on the boundary).
    pub fn jump(&self, f: usize, cell_values: &[f64]) -> f64 {
        let fc = &self.facets[f];
        cell_values[fc.plus] - fc.minus.map_or(0.0, |m| cell_values[m])
    }
}

/// Unit square split along the (0,0)-(1,1) diagonal and red-refined
/// `levels - 1` times.
pub fn unit_square_mesh(levels: usize) -> Mesh {
    assert!(levels >= 1, "levels must be positive");
    let n = 1usize << (levels - 1);
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| i + (n + 1) * j;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h, 0.0]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(2, vertices, cells).expect("structured square mesh is valid")
}

/// Unit cube with `2^(levels-1)` subcubes per axis, each split into six
/// tetrahedra around its main diagonal.
pub fn unit_cube_mesh(levels: usize) -> Mesh {
    assert!(levels >= 1, "levels must be positive");
    let n = 1usize << (levels - 1);
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize, k: usize| i + (n + 1) * (j + (n + 1) * k);
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for p in PERMS {
                    let mut c = [i, j, k];
                    let mut cell = vec![id(c[0], c[1], c[2])];
                    for &axis in &p {
                        c[axis] += 1;
                        cell.push(id(c[0], c[1], c[2]));
                    }
                    cells.push(cell);
                }
            }
        }
    }
    Mesh::new(3, vertices, cells).expect("structured cube mesh is valid")
}

/// Red refinement of a triangle mesh: each triangle is cut into four by its
/// edge midpoints.
pub fn red_refine_2d(mesh: &Mesh) -> Result<Mesh> {
    if mesh.dim != 2 {
        return Err(Error::InvalidInput("red refinement needs a 2D mesh".into()));
    }
    let mut vertices = mesh.vertices.clone();
    let mut mid: HashMap<[usize; 2], usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = [a.min(b), a.max(b)];
        *mid.entry(key).or_insert_with(|| {
            vertices.push(geom::centroid(&[vertices[a], vertices[b]]));
            vertices.len() - 1
        })
    };
    let mut cells = Vec::with_capacity(4 * mesh.n_cells());
    for cell in &mesh.cells {
        let (a, b, c) = (cell[0], cell[1], cell[2]);
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        cells.push(vec![a, ab, ca]);
        cells.push(vec![ab, b, bc]);
        cells.push(vec![ca, bc, c]);
        cells.push(vec![ab, bc, ca]);
    }
    Mesh::new(2, vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell_signature(mesh: &Mesh) -> Vec<Vec<(i64, i64)>> {
        let mut out: Vec<Vec<(i64, i64)>> = mesh
            .cells
            .iter()
            .map(|c| {
                let mut v: Vec<(i64, i64)> = c
                    .iter()
                    .map(|&i| {
                        let p = mesh.vertices[i];
                        ((p[0] * 1024.0).round() as i64, (p[1] * 1024.0).round() as i64)
                    })
                    .collect();
                v.sort();
                v
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn square_counts() {
        let m = unit_square_mesh(1);
        assert_eq!((m.n_cells(), m.n_vertices()), (2, 4));
        let m = unit_square_mesh(2);
        assert_eq!((m.n_cells(), m.n_vertices()), (8, 9));
        assert_eq!(unit_square_mesh(3).n_cells(), 32);
        assert!((unit_square_mesh(4).total_volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_equals_red_refinement() {
        let mut m = unit_square_mesh(1);
        for level in 2..=4 {
            m = red_refine_2d(&m).unwrap();
            assert_eq!(cell_signature(&m), cell_signature(&unit_square_mesh(level)));
        }
    }

    #[test]
    fn cube_counts() {
        let m = unit_cube_mesh(1);
        assert_eq!((m.n_cells(), m.n_vertices()), (6, 8));
        let m = unit_cube_mesh(2);
        assert_eq!(m.n_cells(), 48);
        assert!((m.total_volume() - 1.0).abs() < 1e-14);
        assert!((m.boundary_measure() - 6.0).abs() < 1e-13);
        // Every tet contains the main diagonal of its subcube.
        let m = unit_cube_mesh(1);
        for c in &m.cells {
            assert!(c.contains(&0) && c.contains(&7));
        }
    }

    #[test]
    fn facets_and_jump_convention() {
        let m = unit_cube_mesh(2);
        let interior = m.facets.iter().filter(|f| !f.is_boundary()).count();
        let boundary = m.facets.len() - interior;
        assert_eq!(4 * m.n_cells(), 2 * interior + boundary);
        for (fi, f) in m.facets.iter().enumerate() {
            assert!((geom::norm(&f.normal) - 1.0).abs() < 1e-14);
            let pts: Vec<Point> = f.vertices.iter().map(|&v| m.vertices[v]).collect();
            let c = geom::centroid(&m.cell_points(f.plus));
            assert!(geom::dot(&f.normal, &geom::sub(&pts[0], &c)) > 0.0);
            if let Some(minus) = f.minus {
                let mut v = vec![0.0; m.n_cells()];
                v[f.plus] = 1.0;
                assert_eq!(m.jump(fi, &v), 1.0);
                assert_ne!(minus, f.plus);
            }
        }
    }

    #[test]
    fn rejects_degenerate_and_nonmanifold() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(matches!(Mesh::new(2, v.clone(), vec![vec![0, 1, 2]]), Err(Error::DegenerateCell(0))));
        let r = Mesh::new(2, v, vec![vec![0, 1, 3], vec![0, 1, 4], vec![0, 1, 5]]);
        assert!(matches!(r, Err(Error::NonConforming(_))));
    }

    #[test]
    fn orientation_is_positive() {
        let v = vec![[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
        let m = Mesh::new(2, v, vec![vec![0, 1, 2]]).unwrap();
        assert!(geom::signed_volume(2, &m.cell_points(0)) > 0.0);
    }
}
