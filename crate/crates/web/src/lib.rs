//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string; errors surface as thrown strings.

use serde_json::json;
use wasm_bindgen::prelude::*;

use elastmix::converge::{run_convergence, DEFAULT_MAX_DOFS};
use elastmix::mesh::{macro_split, unit_square_mesh, MeshFile, SplitKind};
use elastmix::spaces::{StressFamily, StressSpace};
use elastmix::verify::{certificate_on, random_geometry_certificate, rank_certificate, unisolvence_check};

/// Levels above this are too slow for a page that computes on the main thread.
pub const MAX_WEB_LEVEL: usize = 4;

fn family(name: &str) -> Result<StressFamily, String> {
    name.parse().map_err(|_| format!("unknown family {name:?}"))
}

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// The unit square at `level`, optionally macro-split, with per-family
/// stress space sizes.
pub fn square_mesh(level: usize, split: bool) -> Result<String, String> {
    if level == 0 || level > MAX_WEB_LEVEL {
        return Err(format!("level must be in 1..={MAX_WEB_LEVEL}"));
    }
    let coarse = unit_square_mesh(level);
    if !split {
        return serde_json::to_string(&MeshFile::from_mesh(&coarse)).map_err(|e| e.to_string());
    }
    let mm = macro_split(&coarse, SplitKind::TwoDP2).map_err(|e| e.to_string())?;
    let space = StressSpace::new(&mm, StressFamily::TwoDP2).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(MeshFile::from_macro_mesh(&mm)).map_err(|e| e.to_string())?;
    v["stress_dofs"] = json!(space.n_dofs());
    v["displacement_dofs"] = json!(mm.fine.n_cells() * 6);
    Ok(v.to_string())
}

/// Rank certificate on the macro over `vertices` (flat `[x0, y0, x1, y1, ...]`,
/// 2D only) or on the reference macro and `trials` random ones when empty.
pub fn certificate(name: &str, vertices: &[f64], trials: usize, seed: u64) -> Result<String, String> {
    let f = family(name)?;
    let out = if vertices.is_empty() {
        let reference = rank_certificate(f).map_err(|e| e.to_string())?;
        let random = if trials > 0 { random_geometry_certificate(f, trials, seed).map_err(|e| e.to_string())? } else { Vec::new() };
        json!({ "reference": reference, "random": random })
    } else {
        if f.dim() != 2 || vertices.len() != 6 {
            return Err("custom geometry takes three 2D points".into());
        }
        let pts: Vec<[f64; 3]> = vertices.chunks(2).map(|p| [p[0], p[1], 0.0]).collect();
        json!({ "reference": certificate_on(f, &pts).map_err(|e| e.to_string())?, "random": [] })
    };
    Ok(out.to_string())
}

/// Convergence table of the 2D manufactured problem.
pub fn convergence_2d(levels: usize) -> Result<String, String> {
    if !(2..=MAX_WEB_LEVEL).contains(&levels) {
        return Err(format!("levels must be in 2..={MAX_WEB_LEVEL}"));
    }
    let report = run_convergence(StressFamily::TwoDP2, levels, DEFAULT_MAX_DOFS, |_| {}).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// H^2 element DoF matrix conditioning on `trials` random triangles.
pub fn unisolvence(trials: usize, seed: u64) -> Result<String, String> {
    let r = unisolvence_check(trials, seed).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = squareMesh)]
pub fn square_mesh_js(level: usize, split: bool) -> Result<String, JsValue> {
    to_js(square_mesh(level, split))
}

#[wasm_bindgen(js_name = rankCertificate)]
pub fn certificate_js(family: &str, vertices: &[f64], trials: usize, seed: u32) -> Result<String, JsValue> {
    to_js(certificate(family, vertices, trials, seed as u64))
}

#[wasm_bindgen(js_name = convergence2d)]
pub fn convergence_2d_js(levels: usize) -> Result<String, JsValue> {
    to_js(convergence_2d(levels))
}

#[wasm_bindgen(js_name = unisolvence)]
pub fn unisolvence_js(trials: usize, seed: u32) -> Result<String, JsValue> {
    to_js(unisolvence(trials, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn split_square_reports_sizes() {
        let v: Value = serde_json::from_str(&square_mesh(1, true).unwrap()).unwrap();
        assert_eq!(v["cells"].as_array().unwrap().len(), 8);
        assert_eq!(v["displacement_dofs"], 48);
        assert!(square_mesh(0, true).is_err());
    }

    #[test]
    fn custom_triangle_certificate() {
        let v: Value = serde_json::from_str(&certificate("2d-p2", &[0.0, 0.0, 1.0, 0.2, 0.3, 0.9], 0, 1).unwrap()).unwrap();
        assert_eq!(v["reference"]["rank"], 21);
        assert!(certificate("2d-p2", &[0.0, 0.0, 1.0, 0.0, 2.0, 0.0], 0, 1).is_err());
        assert!(certificate("4d", &[], 0, 1).is_err());
    }

    #[test]
    fn small_convergence_table() {
        let v: Value = serde_json::from_str(&convergence_2d(2).unwrap()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 2);
        assert!(convergence_2d(9).is_err());
    }
}
