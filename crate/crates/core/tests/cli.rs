use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn erds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erds")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SHORT: &str = r#"{
  "grid": {"cells": 16},
  "time": {"T": 0.01, "dt0": 1e-4, "snapshot_stride": 20, "adaptive": false}
}"#;

#[test]
fn simulate_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SHORT);
    let out = tmp.path().join("out");
    let res = erds(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "simulate");
    assert_eq!(report["config"]["seed"], 3);
    assert_eq!(report["config"]["grid"]["cells"], 16);

    let mut rdr = csv::Reader::from_path(out.join("series.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().next(), Some("t"));
    assert_eq!(rdr.records().count(), 101);
    let snaps = fs::read_dir(out.join("snapshots")).unwrap().count();
    assert_eq!(snaps, 6);
    assert!(fs::read_to_string(out.join("plot.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn identical_runs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SHORT);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let res = erds(&["simulate", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0));
    }
    for file in ["series.csv", "snapshots/0003.csv", "plot.svg"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let report = |dir: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        v["config"]["output"].as_object_mut().unwrap().remove("dir");
        v
    };
    assert_eq!(report(&a), report(&b));
}

#[test]
fn formats_restrict_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"grid": {"cells": 8}, "time": {"T": 0.001, "dt0": 1e-4, "adaptive": false}, "output": {"formats": ["json"]}}"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(erds(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    assert!(out.join("report.json").exists());
    assert!(!out.join("series.csv").exists());
}

#[test]
fn usage_and_config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(erds(&[]).status.code(), Some(1));
    assert_eq!(erds(&["bogus"]).status.code(), Some(1));
    assert_eq!(erds(&["simulate", "--out", out]).status.code(), Some(1));
    assert_eq!(erds(&["simulate", "--config", "/nonexistent.json", "--out", out]).status.code(), Some(1));

    let bad = write_config(tmp.path(), r#"{"time": {"T": -1}}"#);
    let res = erds(&["simulate", "--config", &bad, "--out", out]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("time.T"));

    let unknown = write_config(tmp.path(), r#"{"grid": {"cels": 8}}"#);
    assert_eq!(erds(&["simulate", "--config", &unknown, "--out", out]).status.code(), Some(1));

    let mismatch = write_config(tmp.path(), r#"{"experiment": {"kind": "check"}}"#);
    assert_eq!(erds(&["simulate", "--config", &mismatch, "--out", out]).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let res = erds(&["--help"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&res.stdout).contains("equilibrium"));
}

#[test]
fn failing_check_exits_two_and_still_reports() {
    let tmp = tempfile::tempdir().unwrap();
    // A narrow bump relaxes through many modes at once, so a single
    // exponential envelope does not fit its distance curve.
    let cfg = write_config(
        tmp.path(),
        r#"{
          "grid": {"cells": 32},
          "time": {"T": 0.05, "dt0": 1e-4, "snapshot_stride": 25, "adaptive": false},
          "experiment": {"samples": 2000, "perturbation": {"cells": [14, 17]}}
        }"#,
    );
    let out = tmp.path().join("out");
    let res = erds(&["stability", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["envelope_violation"]);
    assert!(out.join("series.csv").exists());
}
