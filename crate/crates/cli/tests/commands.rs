//! End-to-end runs of the four commands against temporary output
//! directories.

use std::fs;
use std::path::Path;

use serde_json::Value;

use boundedflow_cli::{cmd_attract, cmd_hypotheses, cmd_solve, cmd_verify, CliError, RunConfig};

fn config(dir: &Path, settings: &[(&str, &str)]) -> RunConfig {
    let mut c = RunConfig { out: dir.to_path_buf(), ..RunConfig::default() };
    for (k, v) in settings {
        c.set(k, v).unwrap();
    }
    c
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

const SMALL_EXATT: &[(&str, &str)] = &[("problem", "exatt"), ("grid.t0", "-10"), ("grid.t1", "10"), ("grid.n", "401")];

#[test]
fn solve_writes_solution_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_solve(&config(dir.path(), SMALL_EXATT)).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.summary);
    assert_eq!(out.files.len(), 3);

    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x"));
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 401);
    assert_eq!(rows[0][0], -10.0);
    assert_eq!(rows[400][0], 10.0);
    assert!(rows.iter().all(|r| r[1] >= -1e-6 && r[1] <= 0.4 + 1e-6));

    let report = read_json(dir.path(), "report.json");
    assert_eq!(report["problem"], "exatt");
    assert_eq!(report["grid"]["n"], 401);
    assert_eq!(report["converged"], true);
    assert!(report["residual"].as_f64().unwrap() <= 1e-4);
    assert!((report["contraction_factor"].as_f64().unwrap() - 1.1).abs() < 1e-12);
    assert!(report["certified_error"].is_null());
}

#[test]
fn inline_zero_forcing_gives_zero_solution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let json = r#"{
        "problem": {
            "F": {"kind": "const", "value": {"kind": "constant", "value": 0.0}},
            "G": {"kind": "const", "value": {"kind": "constant", "value": 2.0}},
            "constants": {"l": 2.0, "k": 0.0, "M": 1.0, "r": 0.0, "L_F": 0.0, "L_G": 0.0}
        },
        "grid": {"t0": -5.0, "t1": 5.0, "n": 101}
    }"#;
    fs::write(&path, json).unwrap();
    let mut c = RunConfig::from_file(&path).unwrap();
    c.out = dir.path().join("out");
    let out = cmd_solve(&c).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.summary);
    let report = read_json(&c.out, "report.json");
    assert_eq!(report["problem"], "inline");
    assert_eq!(report["certified_error"], 0.0);
    let csv = fs::read_to_string(c.out.join("solution.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0.0")), "{csv}");
}

#[test]
fn bad_config_is_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"grid": {"t0": 0, "t1": 1, "n": 11}, "unknown": 1}"#).unwrap();
    let e = RunConfig::from_file(&path).unwrap_err();
    assert_eq!(e.exit_code(), 2);

    let e = RunConfig::from_file(&dir.path().join("missing.json")).unwrap_err();
    assert_eq!(e.exit_code(), 2);

    let mut c = config(dir.path(), &[]);
    c.damping = 0.0;
    assert_eq!(cmd_solve(&c).unwrap_err().exit_code(), 2);

    let c = config(dir.path(), &[("problem", "nope")]);
    assert!(matches!(cmd_solve(&c), Err(CliError::Config(_))));
}

#[test]
fn c2pi_box_violation_is_exit_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_solve(&config(dir.path(), &[("grid.n", "801")])).unwrap();
    assert_eq!(out.exit_code, 3, "{}", out.summary);
    let manifest = read_json(dir.path(), "manifest.json");
    assert_eq!(manifest["exit_code"], 3);
    let failing: Vec<&str> = manifest["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["box"]);
}

#[test]
fn attract_without_perturbations_passes_trivially() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), SMALL_EXATT);
    c.set("attract.perturbations", "").unwrap();
    c.set("attract.horizon", "2").unwrap();
    c.set("attract.h", "0.01").unwrap();
    let out = cmd_attract(&c).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.summary);
    let csv = fs::read_to_string(dir.path().join("trajectories.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x_star"));
    assert_eq!(csv.lines().count(), 202);
}

#[test]
fn attract_writes_one_column_per_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), SMALL_EXATT);
    c.set("attract.perturbations", "0.1,-0.1").unwrap();
    c.set("attract.horizon", "5").unwrap();
    c.set("attract.h", "0.01").unwrap();
    let out = cmd_attract(&c).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.summary);
    let csv = fs::read_to_string(dir.path().join("trajectories.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x_star,x_delta_0,x_delta_1"));
    assert_eq!(csv.lines().count(), 502);
    let report = read_json(dir.path(), "attract.json");
    assert_eq!(report["lambda"], 0.5);
    assert_eq!(report["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn attract_rejects_a_nonpositive_rate() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), &[("problem", "exatt"), ("constants.L_G", "5")]);
    let e = cmd_attract(&c).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    assert!(e.to_string().contains("rate -1.1"), "{e}");
}

#[test]
fn hypotheses_on_constant_maps_dominate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let json = r#"{
        "problem": {
            "F": {"kind": "const", "value": {"kind": "constant", "value": 1.0}},
            "G": {"kind": "const", "value": {"kind": "constant", "value": 4.0}},
            "constants": {"l": 4.0, "k": 0.0, "M": 0.5, "r": 1.0, "L_F": 0.0, "L_G": 0.0}
        }
    }"#;
    fs::write(&path, json).unwrap();
    let mut c = RunConfig::from_file(&path).unwrap();
    c.out = dir.path().to_path_buf();
    let out = cmd_hypotheses(&c).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.summary);
    let report = read_json(dir.path(), "hypotheses.json");
    assert_eq!(report["all_dominate"], true);
    assert_eq!(report["box"]["pass"], true);
    assert_eq!(report["contraction_factor"], 0.0);

    c.set("constants.l", "5").unwrap();
    assert_eq!(cmd_hypotheses(&c).unwrap().exit_code, 3);
}

#[test]
fn solve_outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        cmd_solve(&config(d.path(), SMALL_EXATT)).unwrap();
    }
    for name in ["solution.csv", "report.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn manifest_echoes_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), SMALL_EXATT);
    cmd_solve(&c).unwrap();
    let manifest = read_json(dir.path(), "manifest.json");
    assert_eq!(manifest["command"], "solve");
    let echoed: RunConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    assert_eq!(echoed, c);
    assert_eq!(manifest["versions"]["boundedflow"], boundedflow::VERSION);
    assert_eq!(manifest["timings"][0]["stage"], "solve");
}

#[test]
fn verify_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_verify(&config(dir.path(), &[])).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.summary);
    let report = read_json(dir.path(), "verify.json");
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 20);
}
