//! JSON mesh format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MacroMesh, Mesh, SplitKind};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroRecord {
    pub parent: usize,
    pub cells: Vec<usize>,
    pub interior_facets: Vec<Vec<usize>>,
    pub labels: BTreeMap<String, Vec<f64>>,
    pub nodes: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitKind>,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    #[serde(default)]
    pub macros: Vec<MacroRecord>,
}

impl MeshFile {
    pub fn from_mesh(mesh: &Mesh) -> Self {
        MeshFile {
            dim: mesh.dim,
            split: None,
            vertices: mesh.vertices.iter().map(|p| p[..mesh.dim].to_vec()).collect(),
            cells: mesh.cells.clone(),
            macros: Vec::new(),
        }
    }

    pub fn from_macro_mesh(mm: &MacroMesh) -> Self {
        let dim = mm.dim();
        let mut file = MeshFile::from_mesh(&mm.fine);
        file.split = Some(mm.kind);
        file.macros = mm
            .macros
            .iter()
            .map(|m| MacroRecord {
                parent: m.parent,
                cells: m.cells.clone(),
                interior_facets: m
                    .interior_facets
                    .iter()
                    .map(|&f| mm.fine.facets[f].vertices.clone())
                    .collect(),
                labels: m.points.iter().map(|(k, p)| (k.clone(), p[..dim].to_vec())).collect(),
                nodes: m.nodes.clone(),
            })
            .collect();
        file
    }

    /// Rebuilds the (fine) mesh.
    pub fn to_mesh(&self) -> Result<Mesh> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let mut p = [0.0; 3];
                p[..v.len().min(3)].copy_from_slice(&v[..v.len().min(3)]);
                p
            })
            .collect();
        Mesh::new(self.dim, vertices, self.cells.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
