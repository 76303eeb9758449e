//! Runs the compiled binary: exit codes, report shape, seed handling.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_monotone-gap"));
    cmd.args(args).env_remove("MONOTONE_GAP_SEED");
    if let Some(s) = seed_env {
        cmd.env("MONOTONE_GAP_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON report")
}

#[test]
fn certify_reports_and_exit_codes() {
    let o = run(&["certify", "--n", "3"], None);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "certify");
    assert_eq!(v["result"]["status"], "VALID");
    assert_eq!(v["result"]["trailing_det"]["num"], "-1");
    assert_eq!(v["result"]["trailing_det"]["den"], "125");
    assert_eq!(v["result"]["trailing_det"]["dec"], "-0.0080000000000000000");

    // g_1 = t is monotone of every order, so its gap certificate is invalid
    let o = run(&["certify", "--n", "1"], None);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(json(&o)["result"]["failures"][0], "order2_violation");
}

#[test]
fn usage_and_domain_errors() {
    assert_eq!(run(&["certify"], None).status.code(), Some(2));
    assert_eq!(
        run(&["loewner", "--fn", "g(2,", "--nodes", "1"], None)
            .status
            .code(),
        Some(2)
    );
    let o = run(&["transport", "--n", "2", "--target", "(0,1)"], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("affine"));
    assert_eq!(
        run(
            &["falsify", "--fn", "mobius(1,0,1,1)", "--interval", "-2,0"],
            None
        )
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn loewner_reference_nodes() {
    let o = run(&["loewner", "--fn", "g(2)", "--nodes", "13/20,17/20"], None);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["result"]["verdict"], "NotPsd");
    assert_eq!(v["result"]["determinant"]["num"], "-71");
    assert_eq!(v["result"]["determinant"]["den"], "45000");
    assert_eq!(v["result"]["failing_minor"]["kind"], "principal_minor");
}

#[test]
fn text_output() {
    let o = run(
        &[
            "--output", "text", "loewner", "--fn", "pow(2)", "--nodes", "0,1",
        ],
        None,
    );
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.contains("result.determinant = -1 (-1.0000000000000000)"),
        "{text}"
    );
    assert!(text.contains("result.verdict = NotPsd"), "{text}");
}

#[test]
fn seed_flag_beats_environment() {
    let args = [
        "falsify",
        "--fn",
        "pow(3)",
        "--interval",
        "0,2",
        "--trials",
        "300",
    ];
    let from_env = json(&run(&args, Some("11")));
    assert_eq!(from_env["seed"], 11);
    assert_eq!(from_env["generator"], "xoshiro256++");
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "4"]);
    assert_eq!(json(&run(&with_flag, Some("11")))["seed"], 4);
    assert_eq!(json(&run(&args, None))["seed"], 0);
    assert_eq!(run(&args, Some("abc")).status.code(), Some(2));
}

#[test]
fn convex_gap_vanishes_at_left_end() {
    let o = run(
        &["convex", "--n", "2", "--target", "[0,1)", "--alpha", "7/10"],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let first = &v["result"]["samples"][0];
    assert_eq!(first["t"]["num"], "0");
    assert_eq!(first["value"]["num"], "0");
}

#[test]
fn repeated_runs_are_identical() {
    let args = [
        "--threads",
        "2",
        "falsify",
        "--fn",
        "g(3)",
        "--dim",
        "4",
        "--interval",
        "0,1/5",
        "--trials",
        "500",
        "--seed",
        "9",
    ];
    assert_eq!(run(&args, None).stdout, run(&args, None).stdout);
}
