use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercone")).args(args).output().unwrap()
}

fn report(args: &[&str]) -> (i32, Value) {
    let o = run(args);
    let v = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
    (o.status.code().unwrap(), v)
}

#[test]
fn family_run_verifies() {
    let (code, r) = report(&["family", "--n", "6", "--d", "2", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["verified"], true);
    assert_eq!(r["params"]["seed"], 7);
    assert_eq!(r["input_hash"].as_str().unwrap().len(), 64);
    assert!(!r["result"]["family"]["matchings"].as_array().unwrap().is_empty());
}

#[test]
fn infeasible_family_is_a_usage_error() {
    let o = run(&["family", "--n", "3", "--d", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2d <= n"));
}

#[test]
fn unknown_lemma_and_bad_flags_exit_2() {
    assert_eq!(run(&["verify-lemma", "nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--exact", "--float"]).status.code(), Some(2));
    assert_eq!(run(&["verify-lemma", "edmd", "--n", "3", "--d", "2", "--point", "1,x"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_hypercone"))
        .args(["bounds"])
        .env("HYP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn jacobi_reports_lambda_and_bound() {
    let (code, r) = report(&["verify-lemma", "jacobi", "--n", "8", "--d", "3"]);
    assert_eq!(code, 0);
    let row = &r["result"][0];
    assert!(row["lambda"].is_array());
    assert!(row["derivative"].is_array());
    assert_eq!(row["bound_ok"], true);
}

#[test]
fn edmd_hand_example() {
    let (code, r) = report(&["verify-lemma", "edmd", "--n", "3", "--d", "2", "--samples", "1", "--point", "1,1,-2"]);
    assert_eq!(code, 0);
    assert_eq!(r["passed"], true);
    assert_eq!(r["result"][0]["bound"], "1/18");
}

#[test]
fn report_has_the_documented_shape() {
    let (code, r) = report(&["pack", "--n", "4", "--d", "1"]);
    assert_eq!(code, 0);
    for key in ["op", "params", "samples", "failures", "min_gap", "bounds", "checks", "input_hash"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert!(r["bounds"]["log2"]["R"].is_number());
    assert!(r["bounds"]["exact"]["R"].is_string());
    let (_, f) = report(&["pack", "--n", "4", "--d", "1", "--float"]);
    assert!(f["bounds"].get("exact").is_none());
}

#[test]
fn bounds_table() {
    let (code, r) = report(&["bounds", "--n", "6", "--d", "2", "--B", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["bounds"]["packing"]["b"], 3);
    assert!(r["bounds"]["max_log2_rel_err"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn out_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("hypercone-cli-{}.json", std::process::id()));
    let o = run(&["verify-lemma", "aspect", "--samples", "20", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), o.stdout);
    std::fs::remove_file(path).ok();
}

#[test]
fn failing_check_exits_1() {
    // eps far above the budgets: the certificate refuses, which is a run failure
    let o = run(&["hdist", "--pairs", "1", "--samples", "10", "--eps", "1/10"]);
    assert_eq!(o.status.code(), Some(1));
}
