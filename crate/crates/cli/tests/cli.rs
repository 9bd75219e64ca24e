use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boostfield")).args(args).output().unwrap()
}

fn with_config(dir: &Path, json: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, json).unwrap();
    let out = dir.join("out");
    let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn empty_selection_is_a_no_op() {
    let d = scratch("cli-empty");
    let o = with_config(&d, r#"{"suites": []}"#, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("no suites selected"));
    let summary = fs::read_to_string(d.join("out/summary.json")).unwrap();
    assert!(summary.contains("\"schema\": 1") && summary.contains("\"suites\": []"));
}

#[test]
fn negative_tolerance_is_a_config_error() {
    let d = scratch("cli-negative");
    let o = with_config(&d, r#"{"kernels": {"tolerance": -1e-6}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.join("out").exists());
}

#[test]
fn unknown_keys_and_bad_json_are_config_errors() {
    let d = scratch("cli-unknown");
    assert_eq!(with_config(&d, r#"{"suites": [], "seeed": 2}"#, &[]).status.code(), Some(2));
    assert_eq!(with_config(&d, "{", &[]).status.code(), Some(2));
    assert_eq!(with_config(&d, r#"{"schema": 2}"#, &[]).status.code(), Some(2));
    assert_eq!(run(&["--suite", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let d = scratch("cli-io");
    let blocker = d.join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run(&["--suite", "symbols", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn failing_assertion_exits_one_and_lists_the_check() {
    let d = scratch("cli-fail");
    // pinning a tolerance below round-off forces the moment checks to fail
    let o = with_config(&d, r#"{"gaussian": {"moment_tolerance": 1e-300, "velocities": [0.6], "field_functions": 10}}"#, &["--suite", "gaussian"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gaussian: diagonal moments v0.6"), "{err}");
    let report = fs::read_to_string(d.join("out/gaussian.json")).unwrap();
    assert!(report.contains("\"pass\": false"));
}

#[test]
fn suite_flag_and_seed_override() {
    let d = scratch("cli-seed");
    let out = d.join("out");
    let o = run(&["--suite", "symbols", "--suite", "thermal", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("symbols.json").exists() && out.join("thermal.json").exists());
    assert!(!out.join("fock.json").exists());
    let r = fs::read_to_string(out.join("symbols.json")).unwrap();
    assert!(r.contains("\"seed\": 9"));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.lines().all(|l| l.contains("PASS")));
}

#[test]
fn kernel_dumps_read_back() {
    let d = scratch("cli-dumps");
    let o = with_config(&d, r#"{"kernels": {"grid_points": 8, "velocities": [0.6]}}"#, &["--suite", "kernels"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bin = fs::read(d.join("out/kernels/continuum_v0.6.bin")).unwrap();
    let grid = boostfield::io::read_kernel_binary(&bin[..]).unwrap();
    assert_eq!(grid.values.len(), 64);
    let csv = fs::read_to_string(d.join("out/kernels/continuum_v0.6.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 64);
    let first: Vec<f64> = rows[0].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first, vec![grid.time_points[0], grid.space_points[0][0], grid.values[0].re, grid.values[0].im]);
}
