//! End-to-end checks of the binary: artifacts, exit codes, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_potint")
}

fn tmp_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("potint-cli-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn prodint_emits_cosh_sinh_row() {
    let d = tmp_dir("prodint");
    let spec = write_spec(
        &d,
        "job.json",
        r#"{"schema":1,"tol":1e-12,"inputs":{
            "kernel":{"variant":"constant","re":1.0,"im":0.0},
            "integrator":{"variant":"piecewise_linear","breakpoints":[0.0,1.0],
              "values":[{"re":[[0,0],[0,0]],"im":[[0,0],[0,0]]},
                        {"re":[[0,1],[1,0]],"im":[[0,0],[0,0]]}]}}}"#,
    );
    let out = run(&["prodint", "--spec", spec.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.join("result.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("a00_re,"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((row[0] - 1.0_f64.cosh()).abs() < 1e-10);
    assert!((row[2] - 1.0_f64.sinh()).abs() < 1e-10);
    // LF endings only, no CR.
    assert!(!csv.contains('\r'));
}

#[test]
fn empty_factor_list_yields_identity_product() {
    let d = tmp_dir("bpfactor");
    let spec = write_spec(
        &d,
        "job.json",
        r#"{"schema":1,"inputs":{"factors":[],"dim":2,
            "grid":{"radii":[0.5],"num_angles":4}}}"#,
    );
    let out = run(&["bp-factor", "--spec", spec.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert!(out.status.success());
    let grid = std::fs::read_to_string(d.join("grid.csv")).unwrap();
    for line in grid.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        // norm = 1, gram defect = 0, |det| = 1 for the identity.
        let norm: f64 = cols[cols.len() - 3].parse().unwrap();
        let defect: f64 = cols[cols.len() - 2].parse().unwrap();
        assert!((norm - 1.0).abs() < 1e-14 && defect < 1e-14);
    }
}

#[test]
fn schema_mismatch_exits_1() {
    let d = tmp_dir("schema");
    let spec = write_spec(&d, "job.json", r#"{"schema":2,"inputs":{}}"#);
    let out = run(&["prodint", "--spec", spec.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn command_field_mismatch_exits_1() {
    let d = tmp_dir("cmdfield");
    let spec = write_spec(&d, "job.json", r#"{"schema":1,"command":"ode","inputs":{}}"#);
    let out = run(&["prodint", "--spec", spec.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_is_deterministic_and_seed_sensitive() {
    let d = tmp_dir("verify");
    let spec = write_spec(
        &d,
        "job.json",
        r#"{"schema":1,"inputs":{"suite":"telescoping","instances":5}}"#,
    );
    let mut csvs = Vec::new();
    for out_name in ["a", "b"] {
        let o = d.join(out_name);
        let out = run(&[
            "verify",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            o.to_str().unwrap(),
            "--seed",
            "7",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(std::fs::read(o.join("verify.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1], "same seed must give byte-identical output");

    let o = d.join("c");
    let out = run(&[
        "verify",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        o.to_str().unwrap(),
        "--seed",
        "8",
    ]);
    assert!(out.status.success());
    let other = std::fs::read(o.join("verify.csv")).unwrap();
    assert_ne!(csvs[0], other, "different seed should change the residuals");
}

#[test]
fn demo_nonuniqueness_reports_gaps() {
    let d = tmp_dir("demo");
    let out = run(&["demo-nonuniqueness", "--out", d.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert!(report["function_gap"].as_f64().unwrap() <= 1e-8);
    assert!(report["integrator_gap"].as_f64().unwrap() >= 0.2);
}
