use std::process::{Command, Output};

use serde_json::Value;

fn elastmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastmix")).args(args).env("ELASTMIX_THREADS", "2").output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn mesh_cell_counts() {
    for (kind, split, cells) in [("square", "2d-p2", 8), ("square", "none", 2), ("cube", "3d-p3", 24), ("cube", "3d-p2", 72)] {
        let out = elastmix(&["mesh", "--kind", kind, "--levels", "1", "--split", split, "--out", "-"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_json(&out);
        assert_eq!(v["cells"].as_array().unwrap().len(), cells, "{kind} {split}");
    }
}

#[test]
fn mesh_file_round_trip() {
    let path = std::env::temp_dir().join(format!("elastmix-mesh-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let out = elastmix(&["mesh", "--kind", "square", "--levels", "2", "--split", "2d-p2", "--out", p]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let file = elastmix::mesh::MeshFile::from_json(&text).unwrap();
    let mesh = file.to_mesh().unwrap();
    assert_eq!(mesh.n_cells(), 32);
    assert_eq!(file.macros.len(), 8);
    assert!((mesh.total_volume() - 1.0).abs() < 1e-14);
}

#[test]
fn rank_certificate_3d_p2() {
    let out = elastmix(&["verify", "rank", "--family", "3d-p2", "--trials", "2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let r = &v["rank"][0];
    assert_eq!(r["reference"]["N_u"], 144);
    assert_eq!(r["reference"]["rank"], 138);
    assert_eq!(r["trials_passed"], 2);
    assert!(r["min_sv_gap"].as_f64().unwrap() >= 1e6);
    assert_eq!(v["pass"], true);
}

#[test]
fn sequence_audit_identity() {
    let out = elastmix(&["verify", "sequence", "--levels", "1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let r = &v["sequence"][0]["report"];
    assert_eq!(r["identity"], 3);
    assert!(r["inclusion_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "unisolvence", "--trials", "3", "--seed", "11"];
    let a = elastmix(&args);
    let b = elastmix(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["seed"], 11);
}

#[test]
fn converge_writes_csv_with_rates() {
    let out = elastmix(&["converge", "--problem", "2d-p2", "--levels", "3", "--out", "-"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("meshsize,e_sigma_L2,rate_sigma"));
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[2], "");
    let last: Vec<f64> = lines[3].split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[0] - 0.25).abs() < 1e-12);
    assert!(last[2] > 2.5 && last[4] > 1.9, "{}", lines[3]);
}

#[test]
fn bad_input_exits_with_two() {
    for args in [
        &["converge", "--problem", "2d-p2", "--levels", "1", "--out", "-"][..],
        &["verify", "rank", "--family", "3d-p2-flat"],
        &["mesh", "--kind", "square", "--levels", "0", "--out", "-"],
        &["verify", "infsup", "--family", "3d-p2-flat"],
    ] {
        let out = elastmix(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    // Clap's own usage errors also use code 2.
    assert_eq!(elastmix(&["verify", "nonsense"]).status.code(), Some(2));
}
