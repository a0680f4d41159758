//! The `qfrob` binary: reports, exit codes, config files.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qfrob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfrob")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qfrob-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const GOLDEN: [&str; 15] = [
    "search", "--p", "3", "--t", "3", "--a", "1/5,0", "--h", "1/2", "--smax", "9", "--order", "40", "--guard", "6",
];

#[test]
fn golden_search() {
    let out = qfrob(&GOLDEN);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["digits"], serde_json::json!([[1, 0, 1, 1, 2, 1, 2, 1, 1]]));
    assert_eq!(r["match"], Value::Bool(true));
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["inputs"]["a"], serde_json::json!(["1/5", "0"]));
    assert!(r["result"]["search"]["loss"]["certified_exponent"].as_u64().unwrap() >= 15);
}

#[test]
fn reports_are_byte_identical() {
    let a = qfrob(&GOLDEN);
    let b = qfrob(&GOLDEN);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_is_opt_in() {
    assert!(report(&qfrob(&GOLDEN)).get("wall_time_ms").is_none());
    let mut args = GOLDEN.to_vec();
    args.push("--timing");
    assert!(report(&qfrob(&args))["wall_time_ms"].is_number());
}

#[test]
fn gamma_pq_at_zero() {
    let out = qfrob(&["gamma-pq", "--p", "3", "--t", "3", "--x", "0/1", "--prec", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["residue"], "1");
}

#[test]
fn cyclo_identities() {
    let out = qfrob(&["cyclo", "--p", "3", "--s", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["all_hold"], Value::Bool(true));
}

#[test]
fn congruence_suite() {
    let out = qfrob(&["verify", "congruences", "--p", "5", "--s", "2", "--a", "1/3,2/7", "--order", "12"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["all_hold"], Value::Bool(true));
}

#[test]
fn theorem_rechecks_by_default() {
    let out = qfrob(&["verify", "theorem", "--p", "3", "--t", "3", "--a", "1/5,0", "--h", "1/2", "--smax", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["recheck_digits"], serde_json::json!([[1, 0, 1, 1, 2]]));
    assert_eq!(r["result"]["verdict"], "verified");
}

#[test]
fn mismatch_exit_code() {
    let out = qfrob(&["projective", "--p", "3", "--a", "1/5,0", "--smax", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["match"], Value::Bool(false));
}

#[test]
fn ambiguity_exit_code() {
    let out = qfrob(&["search", "--p", "3", "--t", "3", "--a", "1/5,0", "--h", "0", "--smax", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["error"]["kind"], "multiple_survivors");
    assert!(r["error"]["count"].as_u64().unwrap() > 1);
}

#[test]
fn usage_errors() {
    let missing = qfrob(&["search", "--p", "3", "--t", "3", "--a", "1/5,0", "--smax", "3"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(report(&missing)["error"]["kind"], "invalid_parameter");
    let not_prime = qfrob(&["gamma-pq", "--p", "4", "--t", "4", "--x", "1", "--prec", "3"]);
    assert_eq!(not_prime.status.code(), Some(1));
    let bad_t = qfrob(&["gamma-pq", "--p", "3", "--t", "1", "--x", "1", "--prec", "3"]);
    assert_eq!(bad_t.status.code(), Some(1));
    let unknown = qfrob(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(!unknown.stderr.is_empty());
}

#[test]
fn config_file_with_flag_override() {
    let cfg = scratch("golden.json");
    std::fs::write(&cfg, r#"{"p": 3, "t": "3", "a": ["1/5", "0"], "h": "1/2", "smax": 9}"#).unwrap();
    let from_file = qfrob(&["search", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(report(&from_file)["digits"], serde_json::json!([[1, 0, 1, 1, 2, 1, 2, 1, 1]]));
    let overridden = qfrob(&["search", "--config", cfg.to_str().unwrap(), "--smax", "4"]);
    let r = report(&overridden);
    assert_eq!(r["digits"], serde_json::json!([[1, 0, 1, 1]]));
    assert_eq!(r["inputs"]["smax"], 4);
}

#[test]
fn config_file_rejects_unknown_keys() {
    let cfg = scratch("typo.json");
    std::fs::write(&cfg, r#"{"p": 3, "smx": 9}"#).unwrap();
    let out = qfrob(&["search", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_file_receives_report() {
    let path = scratch("report.json");
    let out = qfrob(&["gamma-pq", "--p", "3", "--t", "3", "--x", "1/2", "--prec", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["command"], "gamma-pq");
    assert_eq!(written["digits"].as_array().unwrap().len(), 4);
}

#[test]
fn verbose_streams_stage_table() {
    let mut args = GOLDEN.to_vec();
    args.push("--verbose");
    let out = qfrob(&args);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.lines().filter(|l| l.starts_with("stage")).count() >= 6, "{err}");
}
