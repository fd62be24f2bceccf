//! Command-line contract: flags, config handling, exit codes and output layout.

use std::path::Path;
use std::process::{Command, Output};

fn cogrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogrelay"))
        .args(args)
        .env_remove("COGRELAY_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let lines = data_lines(text);
    let k = lines[0].split(',').position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    lines[1..].iter().map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn missing_config_file_is_an_io_error() {
    let o = cogrelay(&["rate", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/definitely/not/here.cfg"));
}

#[test]
fn bad_config_values_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "n = 100\nsigma_s2 = -1\n").unwrap();
    let o = cogrelay(&["rate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(cogrelay(&["rate", "--set", "bogus=1"]).status.code(), Some(1));
    assert_eq!(cogrelay(&["rate", "--ps", "20"]).status.code(), Some(1));
    assert_eq!(cogrelay(&["rate", "--threads", "0"]).status.code(), Some(1));
    assert_eq!(cogrelay(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn infeasible_design_exits_with_two() {
    // the source alone uses up the interference budget
    let o = cogrelay(&["optimize-alpha", "--set", "sigma_sp2=3", "--ps", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_three() {
    let o = cogrelay(&["optimize-ps", "--out", "/definitely/not/here/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn optimize_ps_default_reference_value() {
    let o = cogrelay(&["optimize-ps"]);
    assert!(o.status.success());
    let v: f64 = column(&stdout(&o), "ps_opt")[0].parse().unwrap();
    assert!((v - 5.2555).abs() < 1e-3, "{v}");
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.cfg");
    std::fs::write(&path, "# scenario\nn = 40\nalpha = 2.0\ngamma = 4\n").unwrap();
    let o = cogrelay(&["rate", "--config", path.to_str().unwrap(), "--set", "n=60", "--trials", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# n = 60\n") && text.contains("# alpha = 2\n") && text.contains("# gamma = 4\n"));
    assert_eq!(column(&text, "n_trials"), ["10"]);
}

#[test]
fn fig2_writes_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let o = cogrelay(&["fig2", "--seed", "42", "--trials", "20", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(data_lines(&text)[0], "alpha,closed_form_rate_fixed,closed_form_rate_gain,mc_rate,mc_stderr");
    assert!(text.contains("# master_seed = 42\n"));
    for se in column(&text, "mc_stderr") {
        assert!(se.parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn json_rows_mirror_csv() {
    let csv = stdout(&cogrelay(&["sweep", "--axis", "alpha", "--values", "1,2,3"]));
    let json = stdout(&cogrelay(&["sweep", "--axis", "alpha", "--values", "1,2,3", "--format", "json"]));
    assert!(json.contains("\"rows\""));
    let fixed = column(&csv, "closed_form_rate_fixed");
    for v in &fixed {
        assert!(json.contains(&format!("\"closed_form_rate_fixed\": {v}")), "{v} missing from {json}");
    }
}

#[test]
fn sweep_keeps_failed_points() {
    let o = cogrelay(&["sweep", "--axis", "ps", "--range", "4:12:4"]);
    assert!(o.status.success());
    let status = column(&stdout(&o), "status");
    assert_eq!(status.len(), 3);
    assert_eq!(&status[..2], ["ok", "ok"]);
    assert!(status[2].starts_with("\"error"));
}

fn run_to_file(args: &[&str], dir: &Path, name: &str, threads: &str) -> Vec<u8> {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_s = out.to_str().unwrap().to_string();
    full.extend(["--threads", threads, "--out", &out_s]);
    let o = cogrelay(&full);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out).unwrap()
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["rate", "--seed", "7", "--trials", "64", "--mode", "gain"][..],
        &["arp", "--seed", "3", "--trials", "24", "--set", "n=40"][..],
        &["sweep", "--axis", "n", "--values", "20,40", "--trials", "16", "--delta", "0.1"][..],
    ] {
        let one = run_to_file(args, dir.path(), "one.csv", "1");
        let eight = run_to_file(args, dir.path(), "eight.csv", "8");
        assert_eq!(one, eight, "{args:?}");
    }
}

#[test]
fn thread_count_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_cogrelay"))
        .args(["rate", "--trials", "8"])
        .env("COGRELAY_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
