//! Behavioral tests for the `ncdc` binary: exit codes, report shape,
//! reproducibility, and the CSV output path.

use std::process::{Command, Output};

use serde_json::Value;

fn ncdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = ncdc(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn report_has_standard_shape() {
    let rep = report(&["parse", "--expr", "X1 X2' - X2 X1'", "--n", "2"]);
    for key in ["command", "config", "versions", "results"] {
        assert!(rep.get(key).is_some(), "missing report key {key}");
    }
    assert_eq!(rep["command"], "parse");
    assert_eq!(rep["results"]["arity"], 2);
    assert_eq!(rep["results"]["degree"], 2);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = ncdc(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_seed_is_usage_error() {
    let out = ncdc(&["eval", "--expr", "X1", "--n", "1", "--k", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_without_out_is_usage_error() {
    let out = ncdc(&["a3seq", "--kmax", "6", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_error_exits_one() {
    // X1 X2 is not (anti-)self-adjoint, so the sa-calculus must refuse it.
    let out = ncdc(&["derive", "--expr", "X1 X2", "--n", "2", "--calc", "sa"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("self-adjoint"));
}

#[test]
fn a3seq_csv_converges_toward_minus_half() {
    let path = std::env::temp_dir().join(format!("ncdc-a3seq-{}.csv", std::process::id()));
    let out = ncdc(&[
        "a3seq",
        "--kmax",
        "40",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    let last = csv.trim().lines().last().unwrap();
    let mut cols = last.split(',');
    assert_eq!(cols.next(), Some("40"));
    let g40: f64 = cols.next().unwrap().parse().unwrap();
    assert!((g40 + 0.5).abs() < 0.05, "g(40)={g40}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn commutator_example_nullity() {
    let rep = report(&["example", "ex4.1", "--k", "16", "--seed", "7"]);
    let nullity = rep["results"]["nullity_rank"]["nullity"].as_f64().unwrap();
    assert!((nullity - 1.0625).abs() < 1e-12, "nullity={nullity}");
}

#[test]
fn verify_suite_exits_zero_on_success() {
    let rep = report(&["verify", "prop21", "--trials", "50", "--seed", "1"]);
    assert_eq!(rep["results"]["ok"], true);
    assert_eq!(rep["results"]["suites"][0]["failures"], 0);
}

#[test]
fn same_seed_reproduces_results() {
    let args = ["eval", "--expr", "X1 X1' X1", "--n", "1", "--k", "6", "--seed", "99"];
    let a = report(&args);
    let b = report(&args);
    assert_eq!(a["results"], b["results"]);
}

#[test]
fn out_json_writes_the_report() {
    let path = std::env::temp_dir().join(format!("ncdc-report-{}.json", std::process::id()));
    let out = ncdc(&[
        "rogers",
        "--d",
        "12",
        "--eps",
        "0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let on_disk: Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let on_stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(on_disk, on_stdout);
    std::fs::remove_file(&path).ok();
}
