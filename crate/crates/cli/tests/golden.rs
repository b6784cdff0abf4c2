//! Golden-file tests for every subcommand. Set `UPDATE_GOLDEN=1` to
//! rewrite the expected files after an intended output change.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pathminer");

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "pathminer {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn check(name: &str, actual: &[u8]) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{name} differs from golden file:\n{}",
        String::from_utf8_lossy(actual)
    );
}

fn golden(name: &str) -> String {
    golden_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn transform_example() {
    let out = run(&["transform", fixture("example.csv").to_str().unwrap()]);
    check("example.xes", &out.stdout);
}

#[test]
fn simulate_small_cohort() {
    let out = run(&["simulate", "--patients", "120", "--seed", "7"]);
    check("sim120.csv", &out.stdout);
}

#[test]
fn simulate_with_config_file() {
    let out = run(&["simulate", "--config", fixture("sim_config.json").to_str().unwrap()]);
    check("sim_config.csv", &out.stdout);
}

#[test]
fn partial_config_keeps_other_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    fs::write(&path, r#"{"patients": 30, "choices": {"p4": {"tau5": 0.5, "t_dac": 0.0, "t_dhf": 0.5}}}"#).unwrap();
    let out = run(&["simulate", "--config", path.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Death_HF"));
    assert!(!text.contains("Death_AnyCause"));
}

#[test]
fn transform_simulated_cohort() {
    let out = run(&["transform", &golden("sim120.csv")]);
    check("sim120.xes", &out.stdout);
}

#[test]
fn dejure_json_and_dot() {
    check("dejure.json", &run(&["dejure"]).stdout);
    check("dejure.dot", &run(&["dejure", "--format", "dot"]).stdout);
}

#[test]
fn discover_dfg_and_alpha() {
    let log = golden("sim120.xes");
    check("dfm_full.json", &run(&["discover", &log]).stdout);
    check("dfm_half.dot", &run(&["discover", &log, "--paths", "0.5", "--format", "dot"]).stdout);
    check("alpha.json", &run(&["discover", &log, "--algorithm", "alpha"]).stdout);
}

#[test]
fn conform_against_dejure_and_discovered() {
    let log = golden("sim120.xes");
    let dejure = run(&["conform", &log, &golden("dejure.json")]).stdout;
    assert!(String::from_utf8_lossy(&dejure).contains("\"fitness\": 1.0000"));
    check("conform_dejure.json", &dejure);
    check("conform_dfm_full.json", &run(&["conform", &log, &golden("dfm_full.json")]).stdout);
}

#[test]
fn cohorts_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "cohorts",
        &golden("sim120.xes"),
        "--axis",
        "diabetes",
        "--alpha",
        "0.05",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    check("cohorts_summary.txt", &out.stdout);
    check("cohorts_kruskal.csv", &fs::read(dir.path().join("kruskal.csv")).unwrap());
    let mut written: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    written.sort();
    check("cohorts_files.txt", written.join("\n").as_bytes());
}

#[test]
fn decide_reports() {
    let log = golden("sim120.xes");
    let net = golden("dejure.json");
    check("decide_p1.json", &run(&["decide", &log, &net, "--place", "p1", "--seed", "3"]).stdout);
    check(
        "decide_p4_hfref.json",
        &run(&["decide", &log, &net, "--place", "p4", "--filter", "hfref", "--classifiers", "majority,naive-bayes"]).stdout,
    );
}

#[test]
fn output_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    run(&["dejure", "-o", path.to_str().unwrap()]);
    assert_eq!(fs::read(path).unwrap(), run(&["dejure"]).stdout);
}

fn status(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    assert!(out.stdout.is_empty() || out.status.success());
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn exit_codes() {
    assert_eq!(status(&["--help"]).0, 0);
    assert_eq!(status(&["--version"]).0, 0);
    let (code, err) = status(&["frobnicate"]);
    assert_eq!(code, 1);
    assert!(err.contains("Usage"));
    assert_eq!(status(&["dejure", "--no-such-flag"]).0, 1);
    assert_eq!(status(&["transform", "/nonexistent/input.csv"]).0, 1);
    let log = golden("sim120.xes");
    let net = golden("dejure.json");
    assert_eq!(status(&["decide", &log, &net, "--place", "p_end"]).0, 1);
    assert_eq!(status(&["decide", &log, &net, "--place", "p1", "--classifiers", "svm"]).0, 1);
    assert_eq!(status(&["cohorts", &log, "--axis", "age", "--output-dir", "unused"]).0, 1);
    assert_eq!(status(&["discover", &log, "--paths", "1.5"]).0, 1);
    let (code, err) = status(&["conform", &log, &net, "--state-cap", "1"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
}
