//! End-to-end tests of the `coloc` binary: formats, exit codes, and
//! determinism contracts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coloc_cli::report::Report;

fn coloc_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coloc"))
}

fn run(args: &[&str]) -> Output {
    coloc_bin().args(args).output().expect("binary runs")
}

fn write_csv_grid(path: &Path, rows: &[&[f64]]) {
    let mut text = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn simulate_pair(dir: &Path, extra: &[&str]) -> (PathBuf, PathBuf) {
    let x = dir.join("x.csv");
    let y = dir.join("y.csv");
    let mut args = vec![
        "simulate".to_string(),
        format!("--out-x={}", x.display()),
        format!("--out-y={}", y.display()),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let out = coloc_bin().args(&args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (x, y)
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_error_exits_one() {
    let out = run(&["analyze", "a.csv", "b.csv", "--block-size", "zero"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_file_exits_two_with_machine_readable_error() {
    let out = run(&["analyze", "/nonexistent/x.csv", "/nonexistent/y.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(v["error"]["kind"], "data");
    assert!(v["error"]["message"].is_string());
}

#[test]
fn dimension_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    write_csv_grid(&x, &[&[1.0, 2.0], &[3.0, 4.0]]);
    write_csv_grid(&y, &[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
    let out = run(&[
        "analyze",
        x.to_str().unwrap(),
        y.to_str().unwrap(),
        "--perms",
        "4",
        "--block-size",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("dimension mismatch"), "{stderr}");
}

#[test]
fn degenerate_data_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    // Constant channel: Pearson is undefined.
    write_csv_grid(&x, &[&[5.0, 5.0], &[5.0, 5.0]]);
    write_csv_grid(&y, &[&[1.0, 2.0], &[3.0, 4.0]]);
    let out = run(&[
        "analyze",
        x.to_str().unwrap(),
        y.to_str().unwrap(),
        "--stat",
        "pearson",
        "--perms",
        "4",
        "--block-size",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(v["error"]["kind"], "numeric");
}

#[test]
fn analyzes_plain_pgm_input() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.pgm");
    let y = dir.path().join("y.pgm");
    // 4x4 with a gradient; P2 ASCII.
    fs::write(&x, "P2\n4 4\n255\n0 1 2 3 4 5 6 7 8 9 10 11 12 13 14 15\n").unwrap();
    fs::write(&y, "P2\n4 4\n255\n0 2 4 6 8 10 12 14 16 18 20 22 24 26 28 30\n").unwrap();
    let out = run(&[
        "analyze",
        x.to_str().unwrap(),
        y.to_str().unwrap(),
        "--stat",
        "pearson",
        "--perms",
        "8",
        "--block-size",
        "2",
        "--seed",
        "1",
        "--no-timestamp",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.results[0].observed, 1.0);
    assert_eq!(report.results[0].replicates.as_ref().unwrap().len(), 8);
}

#[test]
fn simulate_csv_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (x1, y1) = simulate_pair(dir.path(), &["--seed", "42", "--width", "12", "--height", "9"]);
    let a = (fs::read(&x1).unwrap(), fs::read(&y1).unwrap());
    let (x2, y2) = simulate_pair(dir.path(), &["--seed", "42", "--width", "12", "--height", "9"]);
    let b = (fs::read(&x2).unwrap(), fs::read(&y2).unwrap());
    assert_eq!(a, b);
    let (x3, y3) = simulate_pair(dir.path(), &["--seed", "43", "--width", "12", "--height", "9"]);
    let c = (fs::read(&x3).unwrap(), fs::read(&y3).unwrap());
    assert_ne!(a, c);
}

#[test]
fn simulate_pgm_writes_sidecar_with_scale() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.pgm");
    let y = dir.path().join("y.pgm");
    let out = run(&[
        "simulate",
        "--out-x",
        x.to_str().unwrap(),
        "--out-y",
        y.to_str().unwrap(),
        "--width",
        "10",
        "--height",
        "10",
        "--format",
        "pgm",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let sidecar = dir.path().join("x.pgm.meta.json");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(meta["channels"][0]["maxval"], 65535);
    assert!(meta["channels"][0]["scale"].as_f64().unwrap() > 0.0);
    // The written PGM parses back to the declared dimensions.
    let bytes = fs::read(&x).unwrap();
    let ch = coloc_cli::pgm::parse(&bytes).unwrap();
    assert_eq!((ch.width(), ch.height()), (10, 10));
}

#[test]
fn analyze_json_report_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = simulate_pair(
        dir.path(),
        &["--seed", "7", "--width", "24", "--height", "24", "--theta", "10"],
    );
    let args = [
        "analyze",
        x.to_str().unwrap(),
        y.to_str().unwrap(),
        "--stat",
        "manders",
        "--perms",
        "20",
        "--block-size",
        "4",
        "--seed",
        "3",
        "--no-timestamp",
    ];
    let out1 = run(&args);
    let out2 = run(&args);
    assert!(out1.status.success());
    assert_eq!(out1.stdout, out2.stdout);
    let report = Report::from_json(&String::from_utf8(out1.stdout).unwrap()).unwrap();
    assert_eq!(report.results.len(), 2);
    assert_eq!(report.results[0].name, "manders_m1");
    assert_eq!(report.results[1].name, "manders_m2");
    assert!(report.results[0].manders.is_some());
    // Round trip preserves everything.
    let json = report.to_json();
    assert_eq!(Report::from_json(&json).unwrap(), report);
    // p-values sit on the replicate lattice.
    for r in &report.results {
        let steps = r.p_value * 20.0;
        assert!((steps - steps.round()).abs() < 1e-12);
    }
}

#[test]
fn identical_images_give_zero_pvalue_for_tau_star_app() {
    let dir = tempfile::tempdir().unwrap();
    let (x, _) = simulate_pair(
        dir.path(),
        &["--seed", "11", "--width", "32", "--height", "32"],
    );
    let out = run(&[
        "analyze",
        x.to_str().unwrap(),
        x.to_str().unwrap(),
        "--stat",
        "tau-star-app",
        "--perms",
        "50",
        "--seed",
        "2",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let report = Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.results[0].p_value, 0.0);
}

#[test]
fn null_dist_csv_lists_observed_and_replicates() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = simulate_pair(dir.path(), &["--seed", "9", "--width", "16", "--height", "16"]);
    let out = run(&[
        "null-dist",
        x.to_str().unwrap(),
        y.to_str().unwrap(),
        "--stat",
        "pearson",
        "--perms",
        "12",
        "--block-size",
        "4",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines[0], "replicate,value");
    assert_eq!(lines.len(), 1 + 1 + 12); // header + observed + replicates
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn power_csv_has_expected_shape() {
    let out = run(&[
        "power",
        "--r-list",
        "0.7,0.9",
        "--theta-list",
        "2,8",
        "--runs",
        "10",
        "--null-runs",
        "50",
        "--width",
        "16",
        "--height",
        "16",
        "--stats",
        "pearson,tau-star-app",
        "--seed",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines[0], "statistic,R,theta,runs,rejections,beta");
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    for line in &lines[1..] {
        let beta: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&beta));
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = simulate_pair(dir.path(), &["--seed", "3", "--width", "16", "--height", "16"]);
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "analyze",
        x.to_str().unwrap(),
        y.to_str().unwrap(),
        "--stat",
        "pearson",
        "--perms",
        "5",
        "--seed",
        "1",
        "--no-timestamp",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report = Report::from_json(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.config.stat, "pearson");
}
