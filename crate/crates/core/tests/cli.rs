use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ddisac::grid::GridSpec;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ddisac"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn validate(dir: &Path, text: &str) -> (i32, Value) {
    let cfg = write(dir, "v.json", text);
    let out = run(&["validate", &cfg]);
    (out.status.code().unwrap(), serde_json::from_slice(&out.stdout).unwrap())
}

const SMALL_GRID: &str = r#""grid": {"m": 64, "n": 16, "delta_f_hz": 1e6, "t_cp_s": 1e-7}"#;

#[test]
fn schema_is_json() {
    let out = run(&["schema"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.get("properties").is_some() || v.get("$schema").is_some());
}

#[test]
fn negative_subcarrier_spacing_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = validate(dir.path(), r#"{"grid": {"delta_f_hz": -1}}"#);
    assert_eq!(code, 2);
    assert_eq!(v["valid"], false);
    assert!(v["errors"].as_array().unwrap().iter().any(|e| e["path"] == "grid.delta_f_hz"), "{v}");

    let cfg = write(dir.path(), "r.json", r#"{"grid": {"delta_f_hz": -1}}"#);
    let out = run(&["--out-dir", dir.path().to_str().unwrap(), "run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn too_few_resources_for_the_ues() {
    let dir = tempfile::tempdir().unwrap();
    // eta·M_com·N = 0.125·1·16 = 2 resources for 3 UEs
    let text = format!(
        r#"{{{SMALL_GRID}, "allocation": {{"k": 3, "m_com": 1, "eta": 0.125}},
            "scene": {{"ues": [{{"paths": [{{"range_m": 10}}]}}, {{"paths": [{{"range_m": 10}}]}}, {{"paths": [{{"range_m": 10}}]}}]}}}}"#
    );
    let (code, v) = validate(dir.path(), &text);
    assert_eq!(code, 2);
    assert!(v["errors"].as_array().unwrap().iter().any(|e| e["path"] == "allocation.k"), "{v}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = validate(dir.path(), r#"{"grid": {"m": 64, "bogus": 1}}"#);
    assert_eq!(code, 2);
    assert_eq!(v["valid"], false);
}

#[test]
fn cyclic_prefix_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let scene = |r: f64| format!(r#"{{"scene": {{"ues": [{{"paths": [{{"range_m": {r}}}]}}], "targets": [{{"range_m": {r}}}]}}}}"#);
    let (code, v) = validate(dir.path(), &scene(15.0));
    assert_eq!(code, 0);
    assert!(v["warnings"].as_array().unwrap().is_empty(), "{v}");
    let (code, v) = validate(dir.path(), &scene(50.0));
    assert_eq!(code, 0);
    let warnings = v["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w["path"] == "scene.targets[0].range_m"), "{v}");
}

fn montecarlo_text() -> String {
    format!(
        r#"{{{SMALL_GRID}, "allocation": {{"m_com": 32}},
            "scene": {{"ues": [{{"paths": [{{"range_m": 10}}]}}], "targets": [{{"range_m": 12, "velocity_mps": 3}}]}},
            "experiment": {{"name": "montecarlo-estimation", "trials": 8}}}}"#
    )
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "mc.json", &montecarlo_text());
    let mut csvs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let out = run(&["--seed", "42", "--out-dir", out_dir.to_str().unwrap(), "run", &cfg]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(fs::read(out_dir.join("montecarlo-estimation.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let other = dir.path().join("c");
    run(&["--seed", "43", "--out-dir", other.to_str().unwrap(), "run", &cfg]);
    assert_ne!(csvs[0], fs::read(other.join("montecarlo-estimation.csv")).unwrap());
}

#[test]
fn sidecar_documents_every_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "mc.json", &montecarlo_text());
    let out = run(&["--seed", "1", "--out-dir", dir.path().to_str().unwrap(), "run", &cfg]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("montecarlo-estimation.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let side: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("montecarlo-estimation.json")).unwrap()).unwrap();
    let cols = side["columns"].as_array().unwrap();
    assert_eq!(cols.len(), header.len());
    for (c, h) in cols.iter().zip(&header) {
        assert_eq!(c["name"], *h);
        assert!(!c["description"].as_str().unwrap().is_empty());
    }
    assert_eq!(side["master_seed"], 1);
    assert!(side.get("seed_splitter").is_some());
}

#[test]
fn infeasible_allocation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        r#"{{{SMALL_GRID}, "allocation": {{"m_com": 32}},
            "scene": {{"ues": [{{"paths": [{{"range_m": 10}}]}}], "targets": [{{"range_m": 12}}]}},
            "power": {{"mode": "solve", "p_max_dbm": -60}},
            "experiment": {{"name": "power-allocation"}}}}"#
    );
    let cfg = write(dir.path(), "pa.json", &text);
    let out = run(&["--out-dir", dir.path().to_str().unwrap(), "run", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_scene_allocates_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        r#"{{{SMALL_GRID}, "allocation": {{"k": 0, "m_com": 32}}, "scene": {{"ues": [], "targets": []}},
            "power": {{"mode": "solve"}}, "experiment": {{"name": "power-allocation"}}}}"#
    );
    let cfg = write(dir.path(), "z.json", &text);
    let out = run(&["--out-dir", dir.path().to_str().unwrap(), "run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("power-allocation.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(2), Some("0"), "{line}");
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn iq_dump_has_one_frame() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "mc.json", &montecarlo_text());
    let iq = dir.path().join("frame.iq");
    let out = run(&["--dump-iq", iq.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = GridSpec::new(64, 16, 1e6, 1e-7, 30e9).unwrap();
    let expected = 16 * grid.n() * (grid.m() + grid.cp_samples());
    assert_eq!(fs::metadata(&iq).unwrap().len() as usize, expected);
}

#[test]
fn sensing_bound_falls_forty_db_per_decade() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"experiment": {"name": "sdnr-vs-range", "ranges_m": [100, 200, 400, 1000, 10000]}}"#;
    let cfg = write(dir.path(), "s.json", text);
    let out = run(&["--out-dir", dir.path().to_str().unwrap(), "run", &cfg]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("sdnr-vs-range.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    for w in rows.windows(2) {
        assert!(w[1][2] <= w[0][2], "bound not monotone: {w:?}");
        let decades = (w[1][0] / w[0][0]).log10();
        let slope = (w[1][3] - w[0][3]) / decades;
        assert!((slope + 40.0).abs() < 1e-6, "cancelled slope {slope}");
    }
    // noise-limited far field
    let far = (rows[4][2] - rows[3][2]) / 1.0;
    assert!((far + 40.0).abs() < 0.1, "far-field slope {far}");
}
