//! Global numbering of P_k Lagrange nodes.

use std::collections::HashMap;

use crate::geom::{self, Point};
use crate::mesh::Mesh;
use crate::poly::lattice;

/// A node is identified by the vertices of its carrier simplex with their
/// lattice multiplicities, sorted by vertex index.
pub type NodeKey = Vec<(usize, u8)>;

#[derive(Clone, Debug)]
pub struct NodeMap {
    pub degree: usize,
    pub keys: Vec<NodeKey>,
    pub points: Vec<Point>,
    /// `cell_nodes[c][l]`: global node of local lattice index `l` in cell `c`.
    pub cell_nodes: Vec<Vec<usize>>,
    /// Incident `(cell, local index)` pairs of every node, in cell order.
    pub node_cells: Vec<Vec<(usize, usize)>>,
    index: HashMap<NodeKey, usize>,
}

impl NodeMap {
    pub fn new(mesh: &Mesh, degree: usize) -> Self {
        let local = lattice(mesh.dim + 1, degree);
        let mut index: HashMap<NodeKey, usize> = HashMap::new();
        let mut keys = Vec::new();
        let mut points = Vec::new();
        let mut node_cells: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut cell_nodes = Vec::with_capacity(mesh.n_cells());
        for (c, cell) in mesh.cells.iter().enumerate() {
            let mut ids = Vec::with_capacity(local.len());
            for (l, a) in local.iter().enumerate() {
                let mut key: NodeKey =
                    cell.iter().zip(a).filter(|(_, &m)| m > 0).map(|(&v, &m)| (v, m)).collect();
                key.sort_unstable();
                let id = *index.entry(key.clone()).or_insert_with(|| {
                    let mut p = [0.0; 3];
                    for &(v, m) in &key {
                        p = geom::add(&p, &geom::scale(&mesh.vertices[v], m as f64 / degree as f64));
                    }
                    keys.push(key);
                    points.push(p);
                    node_cells.push(Vec::new());
                    keys.len() - 1
                });
                node_cells[id].push((c, l));
                ids.push(id);
            }
            cell_nodes.push(ids);
        }
        NodeMap { degree, keys, points, cell_nodes, node_cells, index }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn find(&self, key: &[(usize, u8)]) -> Option<usize> {
        let mut k = key.to_vec();
        k.sort_unstable();
        self.index.get(&k).copied()
    }

    /// Vertices of the carrier simplex of a node.
    pub fn support(&self, node: usize) -> Vec<usize> {
        self.keys[node].iter().map(|&(v, _)| v).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_cube_mesh, unit_square_mesh};

    #[test]
    fn node_counts() {
        let m = unit_square_mesh(2);
        let n_edges = m.edges().len();
        assert_eq!(NodeMap::new(&m, 2).len(), m.n_vertices() + n_edges);
        let m = unit_cube_mesh(2);
        let edges = m.edges().len();
        let faces = m.facets.len();
        assert_eq!(NodeMap::new(&m, 3).len(), m.n_vertices() + 2 * edges + faces);
    }

    #[test]
    fn shared_nodes_coincide() {
        let m = unit_cube_mesh(1);
        let nm = NodeMap::new(&m, 3);
        for (id, cells) in nm.node_cells.iter().enumerate() {
            for &(c, l) in cells {
                assert_eq!(nm.cell_nodes[c][l], id);
            }
        }
        let x = nm.find(&[(7, 3)]).unwrap();
        assert!(geom::norm(&geom::sub(&nm.points[x], &[1.0, 1.0, 1.0])) < 1e-15);
    }
}
