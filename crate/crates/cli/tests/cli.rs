//! End-to-end tests of the binary: file formats, exit codes, config
//! precedence and the verification harness.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locham"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("locham-cli-test-{}-{name}", std::process::id()));
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn beta_csv_and_json() {
    let out = run(&["beta", "--x", "1/2", "--y", "1/2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# locham "), "version stamp: {text}");
    assert!(text.contains("1/2,1/2,1.9999999999999998,0"), "{text}");

    let out = run(&["--format", "json", "beta", "--x", "1", "--y", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["command"], "beta");
    assert!((v["value"][0].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-13);
    assert!(v["version"].is_string());
}

#[test]
fn usage_errors_exit_two() {
    // missing required key
    let out = run(&["beta", "--x", "1/2"]);
    assert_eq!(out.status.code(), Some(2));
    // unparsable argument
    let out = run(&["beta", "--x", "zzz", "--y", "1/2"]);
    assert_eq!(out.status.code(), Some(2));
    // missing file
    let out = run(&[
        "dist",
        "--m",
        "2",
        "--k",
        "0",
        "--jet",
        "/nonexistent.jet",
        "--which",
        "scriptC",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_precedence() {
    let cfg = tmp("config");
    std::fs::write(&cfg, "x = 1/2\ny = 1/3\n").unwrap();
    // config supplies both
    let out = run(&[
        "--format",
        "json",
        "beta",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["x"], "1/2");
    assert_eq!(v["y"], "1/3");
    // flag overrides the config value
    let out = run(&[
        "--format",
        "json",
        "beta",
        "--config",
        cfg.to_str().unwrap(),
        "--y",
        "2/3",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["y"], "2/3");
    // unknown config keys are rejected
    let bad = tmp("bad-config");
    std::fs::write(&bad, "x = 1/2\nbogus = 7\n").unwrap();
    let out = run(&["beta", "--config", bad.to_str().unwrap(), "--y", "1/2"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(cfg);
    let _ = std::fs::remove_file(bad);
}

#[test]
fn jet_file_round_trip_through_dist() {
    let jet_path = tmp("f.jet");
    // w^1 wbar^0 with raw derivative 1 at (1, 0)
    std::fs::write(&jet_path, "order 2\n1 0 1.0 0.0\n").unwrap();
    let out = run(&[
        "--format",
        "json",
        "dist",
        "--m",
        "3",
        "--k",
        "1",
        "--jet",
        jet_path.to_str().unwrap(),
        "--which",
        "partial",
        "--j",
        "1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let re = v["values"][0]["value"][0].as_f64().unwrap();
    assert!((re - 1.0).abs() < 1e-14);
    let _ = std::fs::remove_file(jet_path);
}

#[test]
fn dist_csv_range_output() {
    let out = run(&[
        "dist", "--m", "3", "--k", "2", "--f", "mono:1,1", "--which", "scriptC", "--l", "0..5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2 + 6, "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("index,re,im"));
}

#[test]
fn phi_sample_dump_format() {
    let out = run(&[
        "phi", "--m", "2", "--l", "0", "--f", "const", "--s-grid", "0.5,0.25",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# locham"));
    assert_eq!(lines.next().unwrap(), "s,re_phi,im_phi,est_err");
    assert_eq!(lines.count(), 2);
}

#[test]
fn limits_report_schema() {
    let out = run(&[
        "limits", "--check", "thmC", "--m", "2", "--k", "0", "--f", "const",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rep = &v["report"];
    assert!((rep["expected"][0].as_f64().unwrap() + 2.0).abs() < 1e-12);
    assert_eq!(rep["pass"], true);
    assert!(rep["grid"].as_array().unwrap().len() >= 4);
}

#[test]
fn iet_spec_file_and_exit_codes() {
    let spec = tmp("golden.iet");
    std::fs::write(
        &spec,
        "labels: A B\npi0: A B\npi1: B A\nlambda: (3-sqrt(5))/2 (-1+sqrt(5))/2\n",
    )
    .unwrap();
    let out = run(&[
        "--format",
        "json",
        "iet",
        "--spec",
        spec.to_str().unwrap(),
        "--check",
        "keane",
        "--depth",
        "500",
        "--apply",
        "0.0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["keane"]["pass"], true);
    assert_eq!(v["keane"]["exact"], true);
    let tx = v["apply"]["Tx"].as_f64().unwrap();
    assert!((tx - 0.6180339887498949).abs() < 1e-12);

    // a failing check exits 1
    let bad = tmp("rational.iet");
    std::fs::write(&bad, "labels: A B\npi0: A B\npi1: B A\nlambda: 3/7 4/7\n").unwrap();
    let out = run(&[
        "iet",
        "--spec",
        bad.to_str().unwrap(),
        "--check",
        "keane",
        "--depth",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_file(spec);
    let _ = std::fs::remove_file(bad);
}

#[test]
fn flow_orbit_dump() {
    let orbit = tmp("orbit.csv");
    let out = run(&[
        "--format",
        "json",
        "flow",
        "--m",
        "2",
        "--s",
        "0.25",
        "--f",
        "const",
        "--orbit",
        orbit.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["identity_rel_err"].as_f64().unwrap() < 1e-6);
    assert!(v["hamiltonian_drift"].as_f64().unwrap() < 1e-9);
    let text = std::fs::read_to_string(&orbit).unwrap();
    assert!(text.starts_with("# locham "));
    assert!(text.lines().nth(1).unwrap().starts_with("t,re_z,im_z"));
    assert!(text.lines().count() > 5);
    let _ = std::fs::remove_file(orbit);
}

#[test]
fn output_file_and_determinism() {
    let out_a = tmp("a.csv");
    let out_b = tmp("b.csv");
    for path in [&out_a, &out_b] {
        let out = run(&[
            "--output",
            path.to_str().unwrap(),
            "gfun",
            "--m",
            "2",
            "--l",
            "0",
            "--a1",
            "1",
            "--a2",
            "1",
            "--u",
            "1",
            "--s",
            "0.125",
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read_to_string(&out_a).unwrap();
    let b = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(a, b, "identical config must produce identical output");
    let _ = std::fs::remove_file(out_a);
    let _ = std::fs::remove_file(out_b);
}

#[test]
fn decompose_reports_the_log_coefficient() {
    // constant observable at a double saddle: the degree-0 coefficient of
    // the singular series is the log coefficient 2
    let out = run(&[
        "--format",
        "json",
        "decompose",
        "--m",
        "2",
        "--l",
        "0",
        "--parity",
        "0",
        "--k",
        "1",
        "--f",
        "const",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let c0 = v["coefficients"][0][0].as_f64().unwrap();
    assert!((c0 - 2.0).abs() < 0.01, "log coefficient {c0}");
    assert!(v["remainder_diag"].as_f64().unwrap().is_finite());
}

#[test]
fn verify_summary_schema() {
    let out = run(&["verify", "--suite", "iet"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["suite"], "iet");
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    // merged deterministically by name
    let names: Vec<&str> = checks
        .iter()
        .map(|ch| ch["name"].as_str().unwrap())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for ch in checks {
        assert!(ch["pass"].is_boolean());
        assert!(ch["err"].is_number());
        assert!(ch["tolerance"].is_number());
    }
    // unknown suite: usage error
    let out = run(&["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_beta_suite_passes() {
    let out = run(&["verify", "--suite", "beta"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["pass"], true);
    for ch in v["checks"].as_array().unwrap() {
        assert_eq!(ch["pass"], true, "{ch}");
    }
}
