use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn meromap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meromap")).args(args).env_remove("MEROMAP_WORKERS").output().expect("binary runs")
}

fn arg(p: PathBuf) -> String {
    p.display().to_string()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn strong_convergence_of_the_cremona_iterates_exits_zero() {
    let o = meromap(&["converge", "--scenario", &arg(root().join("cremona_iterates.json")), "--notion", "strong"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["verdict"], "converges");
}

#[test]
fn series_notion_diverges_near_the_pole_limit() {
    let o = meromap(&["converge", "--scenario", &arg(root().join("one_over_z_minus.json")), "--notion", "def1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_scenarios_exit_64_with_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"schema\": 1,\n  \"name\": \"x\",\n").unwrap();
    let o = meromap(&["converge", "--scenario", &arg(bad), "--notion", "strong"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json:4:"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_examples_exit_64() {
    assert_eq!(meromap(&["reproduce", "example3"]).status.code(), Some(64));
}

#[test]
fn second_cremona_iterate_is_the_identity() {
    let o = meromap(&["iterate", "--map", &arg(root().join("maps/cremona.json")), "-k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["is_identity"], true);
    assert_eq!(v["components"], serde_json::json!(["z0", "z1", "z2"]));
    assert_eq!(v["degree_trace"], serde_json::json!([2, 1]));
}

#[test]
fn cremona_indeterminacy_is_the_three_coordinate_points() {
    let v = stdout_json(&meromap(&["indet", "--map", &arg(root().join("maps/cremona.json"))]));
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 3);
    let mut ones: Vec<usize> = pts
        .iter()
        .map(|p| {
            let c = p["coords"].as_array().unwrap();
            assert!(p["residual"].as_f64().unwrap() < 1e-8);
            let nonzero: Vec<usize> = (0..3).filter(|&i| c[i][0].as_f64().unwrap() != 0.0 || c[i][1].as_f64().unwrap() != 0.0).collect();
            assert_eq!(nonzero.len(), 1);
            nonzero[0]
        })
        .collect();
    ones.sort();
    assert_eq!(ones, [0, 1, 2]);
}

#[test]
fn pullback_area_of_the_identity_is_half_of_pi() {
    let o = meromap(&["volume", "--map", &arg(root().join("maps/id_disc_to_cp1.json")), "--samples", "100000"]);
    let v = stdout_json(&o);
    let (value, err) = (v["value"].as_f64().unwrap(), v["stderr"].as_f64().unwrap());
    assert!((value - std::f64::consts::FRAC_PI_2).abs() < 3.0 * err + 1e-9, "{value} +- {err}");
}

#[test]
fn graph_normalization_includes_the_source_volume() {
    let o = meromap(&["volume", "--map", &arg(root().join("maps/constant_bidisc.json")), "--volume-normalization", "graph"]);
    let v = stdout_json(&o);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    assert!((v["value"].as_f64().unwrap() - pi2).abs() < 3.0 * v["stderr"].as_f64().unwrap() + 1e-9);
}

#[test]
fn hausdorff_between_identical_maps_is_zero() {
    let m = arg(root().join("maps/ratio.json"));
    let o = meromap(&["hausdorff", "--map", &m, "--map", &m, "--samples", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["cloud_value"].as_f64().unwrap(), 0.0);
}

#[test]
fn out_directory_receives_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = meromap(&[
        "converge",
        "--scenario",
        &arg(root().join("cremona_iterates.json")),
        "--notion",
        "weak",
        "--out",
        &arg(dir.path().to_path_buf()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json = std::fs::read_to_string(dir.path().join("cremona_iterates.weak.json")).unwrap();
    assert!(json.contains("\"schema\": 1"));
    assert!(std::fs::read_to_string(dir.path().join("cremona_iterates.weak.trace.csv")).unwrap().starts_with("n,"));
}

#[test]
fn list_examples_names_the_catalogue() {
    let o = meromap(&["list-examples"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ["example1", "example2", "example4", "cremona", "nonstabilizing", "theorem3", "hartogs", "volume_bound"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn usage_errors_do_not_collide_with_diverges() {
    assert_eq!(meromap(&["converge", "--notion", "sideways"]).status.code(), Some(64));
    assert_eq!(meromap(&["--help"]).status.code(), Some(0));
}
