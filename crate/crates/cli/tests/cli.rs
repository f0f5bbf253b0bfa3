use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qphase")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn write_scenario(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn value(summary: &Value, task: usize, key: &str) -> f64 {
    summary["tasks"][task]["values"][key].as_f64().unwrap_or_else(|| panic!("no value {key}"))
}

#[test]
fn coherent_state_anchors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let sc = write_scenario(
        dir.path(),
        r#"{
  "state": {"kind": "coherent3d"},
  "analysis": [
    {"task": "qpot", "checks": [{"key": "q_origin", "expect": 1.5, "tol": 1e-6}]},
    {"task": "capacity"},
    {"task": "blob-check", "checks": [{"key": "ratio", "expect": 3.0, "tol": 1e-12}]}
  ]
}"#,
    );
    let res = qphase(&["run", &sc, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let s = summary(&out);
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["all_checks_pass"], true);
    assert!((value(&s, 0, "q_origin") - 1.5).abs() < 1e-6);
    assert!((value(&s, 1, "capacity_over_h") - 1.5).abs() < 1e-12);
    assert!((value(&s, 2, "ratio") - 3.0).abs() < 1e-12);
    assert!(out.join("00_qpot.csv").exists());
    assert_eq!(s["overrides"][0], format!("output_dir := {}", out.display()));
}

#[test]
fn well_node_is_reported_at_half_length() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(
        dir.path(),
        &format!(
            r#"{{"state": {{"kind": "well1d", "n": 2, "length": 2.0}}, "output_dir": {:?},
               "analysis": [{{"task": "nodes", "checks": [{{"key": "count", "expect": 1, "tol": 0}}]}}]}}"#,
            dir.path().join("o")
        ),
    );
    let res = qphase(&["run", &sc]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let s = summary(&dir.path().join("o"));
    assert!((value(&s, 0, "position_0") - 1.0).abs() < 1e-9);
}

#[test]
fn empty_task_list_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), r#"{"state": {"kind": "oscillator1d", "n": 0}, "analysis": []}"#);
    let out = dir.path().join("o");
    let res = qphase(&["run", &sc, "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert_eq!(summary(&out)["tasks"].as_array().unwrap().len(), 0);
}

#[test]
fn schema_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "{\n  \"state\": {\"kind\": \"coherent3d\"},\n  \"analysis\": [{\"task\": \"qpott\"}]\n}\n");
    let res = qphase(&["run", &sc]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains(&format!("{sc}:3:")), "{err}");
}

#[test]
fn incompatible_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), r#"{"state": {"kind": "well1d", "n": 1}, "analysis": []}"#);
    let res = qphase(&["run", &sc, "--grid-override", "64:0:1"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn failed_check_exits_1_and_names_the_task() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let sc = write_scenario(
        dir.path(),
        r#"{"state": {"kind": "oscillator1d", "n": 0},
            "analysis": [{"task": "fermi-residual", "checks": [{"key": "residual", "min": 1.0}]}]}"#,
    );
    let res = qphase(&["run", &sc, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("fermi-residual"));
    assert_eq!(summary(&out)["all_checks_pass"], false);
}

#[test]
fn overrides_change_the_physics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let sc = write_scenario(dir.path(), r#"{"state": {"kind": "coherent3d"}, "analysis": [{"task": "capacity"}]}"#);
    let res = qphase(&["run", &sc, "--hbar", "0.5", "--omega", "2", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let s = summary(&out);
    // c = 3h/2 whatever the units
    assert!((value(&s, 0, "capacity") - 1.5 * std::f64::consts::TAU * 0.5).abs() < 1e-12);
    assert_eq!(s["config"]["physics"]["hbar"], 0.5);
}

#[test]
fn artifacts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"state": {"kind": "oscillator1d", "n": 1}, "seed": 3,
        "analysis": [{"task": "trajectories", "count": 5, "dt": 0.01, "steps": 20, "every": 5},
                     {"task": "evolve", "dt": 0.01, "steps": 10}]}"#;
    let sc = write_scenario(dir.path(), body);
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        assert!(qphase(&["run", &sc, "--out", out.to_str().unwrap()]).status.success());
        files.push(
            ["00_trajectories.csv", "01_evolve_final.csv"].map(|f| std::fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(files[0], files[1]);
    let csv = String::from_utf8(files[0][0].clone()).unwrap();
    assert!(csv.starts_with("seed_id,t,x\n"));
}

#[test]
fn unknown_suite_exits_2() {
    assert_eq!(qphase(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn symplectic_suite_reports_json() {
    let res = qphase(&["verify", "symplectic"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    let ids: Vec<u64> = v["verdicts"].as_array().unwrap().iter().map(|x| x["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [4, 5, 11]);
    assert_eq!(v["all_pass"], true);
}

#[test]
fn shipped_scenarios_run_and_cover_the_schema() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(root.join("schemas/scenario.schema.json")).unwrap()).unwrap();
    let mut declared: Vec<String> = schema["$defs"]["task"]["oneOf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["properties"]["task"]["const"].as_str().unwrap().to_string())
        .collect();
    declared.sort();
    let dir = tempfile::tempdir().unwrap();
    let mut used = Vec::new();
    for entry in std::fs::read_dir(root.join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        let sc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        used.extend(sc["analysis"].as_array().unwrap().iter().map(|t| t["task"].as_str().unwrap().to_string()));
        let out = dir.path().join(path.file_stem().unwrap());
        let res = qphase(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&res.stderr));
    }
    used.sort();
    used.dedup();
    assert_eq!(used, declared);
}
