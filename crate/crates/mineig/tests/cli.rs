//! Runs the `mineig` binary end to end: exit codes, output files, formats.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mineig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mineig"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Writes `config` into `dir` and runs `command` with `--out dir/out`.
fn run_in(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ];
    args.extend_from_slice(extra);
    mineig(&args)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, command: &str) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join(format!("out/{command}.csv")))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn validation_failures_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run_in(dir.path(), "spectrum", "alpha = one\n", &[]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(dir.path(), "spectrum", "no_such_key = 1\n", &[]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(dir.path(), "spectrum", "alpha = 1\nalpha = 2\n", &[])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run_in(dir.path(), "spectrum", "points = 0\n", &[]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(dir.path(), "spectrum", "", &["--frobnicate"]).status.code(),
        Some(2)
    );
    assert_eq!(run_in(dir.path(), "no-such-command", "", &[]).status.code(), Some(2));
    assert_eq!(mineig(&["spectrum"]).status.code(), Some(2));
    let missing = mineig(&["spectrum", "--config", "/nonexistent/run.cfg"]);
    assert_ne!(missing.status.code(), Some(0));
    let err = run_in(dir.path(), "spectrum", "count = 2\nalpha 1\n", &[]);
    assert_eq!(err.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&err.stderr).contains("line 2"));
}

#[test]
fn free_spectrum_starts_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "spectrum",
        "potential = constant\nkappa0 = 1\nalpha = 0\ncount = 3\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path(), "spectrum");
    assert_eq!(rows.len(), 3);
    let l0: f64 = rows[0][1].parse().unwrap();
    let l1: f64 = rows[1][1].parse().unwrap();
    assert!(l0.abs() < 1e-9);
    assert!((l1 - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-8);
    let s = summary(dir.path());
    assert_eq!(s["status"], "ok");
    assert_eq!(s["command"], "spectrum");
    assert!(s["phases"].as_object().unwrap().values().all(Value::is_null));
}

#[test]
fn constant_table_is_subcritical_with_equality() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("v.tbl"),
        "# constant potential\n0 2.5\n0.5 2.5\n1 2.5\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        "hill-bound",
        "potential = table\npotential_table = v.tbl\npoints = 64\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path(), "hill-bound");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "subcritical");
    let bound: f64 = rows[0][4].parse().unwrap();
    assert!((bound - 2.5).abs() < 1e-12);
    let s = summary(dir.path());
    assert_eq!(s["invariants"]["equality_for_constants"], true);
}

#[test]
fn bad_table_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.tbl"), "0 1\n0.5 x\n").unwrap();
    let out = run_in(
        dir.path(),
        "hill-bound",
        "potential = table\npotential_table = v.tbl\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn perturb_reports_the_critical_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "perturb",
        "coupling = square\nkappa0 = 2pi\nalpha = 0.25\npoints = 64\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert!((s["results"]["alpha_star"].as_f64().unwrap() - 0.25).abs() < 1e-15);
    assert!(s["results"]["ell2"].as_f64().unwrap().abs() <= 1e-9);
    assert_eq!(s["all_invariants_pass"], true);
}

#[test]
fn undefined_critical_coupling_is_not_an_error_for_perturb() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "perturb",
        "coupling = square\nkappa0 = 0\nalpha = 1\npoints = 32\n",
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(summary(dir.path())["results"]["alpha_star"].is_null());
}

#[test]
fn reruns_are_byte_identical_and_timings_are_opt_in() {
    let config = "potential = random\nsamples = 5\nmodes = 6\namplitude = 3\n";
    let read = |d: &Path| {
        (
            fs::read(d.join("out/hill-bound.csv")).unwrap(),
            fs::read(d.join("out/summary.json")).unwrap(),
        )
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    assert!(run_in(a.path(), "hill-bound", config, &["--seed", "7"])
        .status
        .success());
    assert!(run_in(b.path(), "hill-bound", config, &["--seed", "7"])
        .status
        .success());
    assert!(run_in(c.path(), "hill-bound", config, &["--seed", "8"])
        .status
        .success());
    assert_eq!(read(a.path()), read(b.path()));
    assert_ne!(read(a.path()).0, read(c.path()).0);
    let t = tempfile::tempdir().unwrap();
    assert!(run_in(t.path(), "hill-bound", config, &["--seed", "7", "--timings"])
        .status
        .success());
    assert!(summary(t.path())["phases"]
        .as_object()
        .unwrap()
        .values()
        .all(Value::is_f64));
    assert_eq!(read(a.path()).0, read(t.path()).0);
}
