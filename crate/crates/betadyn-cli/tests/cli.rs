//! End-to-end checks of the command-line surface: golden outputs,
//! byte-level determinism, JSON round-trips and exit codes.

use std::process::Command;

fn run(args: &[&str]) -> (String, String, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_betadyn"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code(),
    )
}

#[test]
fn expand_golden() {
    let (out, _, code) = run(&[
        "expand",
        "--beta",
        "poly:-1,-1,1@[1,2]",
        "--x",
        "0",
        "--n",
        "8",
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(out.trim(), "00000000");

    let (out, _, _) = run(&["expand", "--beta", "dec:2", "--x", "5/8", "--n", "5"]);
    assert_eq!(out.trim(), "10100");
}

#[test]
fn classify_golden_json() {
    let (out, _, code) = run(&["classify", "--q", "0,0,1,3", "--format", "json"]);
    assert_eq!(code, Some(0));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["kind"], "interval");
    assert_eq!(v["lower"], "0/1");
    assert_eq!(v["upper"], "0/1");
}

#[test]
fn examples_table_golden() {
    let (out, _, code) = run(&["examples", "--format", "table"]);
    assert_eq!(code, Some(0));
    for want in ["1/4", "1/9", "1/2", "1/25", "1/3", "9/20"] {
        assert!(out.contains(want), "missing {want} in table:\n{out}");
    }
    // The csv form carries the dimension column in fixed order.
    let (csv, _, _) = run(&["examples", "--format", "csv"]);
    let dims: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(dims, vec!["1/4", "1/9", "1/2", "0/1", "1/25", "1/3", "9/20"]);
}

#[test]
fn determinism_byte_identical() {
    for args in [
        vec!["examples", "--format", "json"],
        vec!["partition", "--beta", "poly:-1,-1,1@[1,2]", "--n", "4"],
        vec![
            "verify-membership",
            "--v",
            "2",
            "--vhat",
            "1/2",
            "--pad",
            "8",
            "--levels",
            "4",
            "--beta",
            "dec:2",
            "--psi1",
            "rule(index=all, rate=19/10)",
            "--psi2",
            "rule(index=all, rate=9/20)",
            "--samples",
            "5",
            "--format",
            "json",
        ],
    ] {
        let (a, _, _) = run(&args);
        let (b, _, _) = run(&args);
        assert_eq!(a, b, "non-deterministic output for {args:?}");
    }
}

#[test]
fn json_outputs_reparse() {
    for args in [
        vec!["eps-star", "--beta", "dec:2.5", "--n", "6", "--format", "json"],
        vec!["psi-exp", "--psi", "rule(index=tower, rate=3)", "--format", "json"],
        vec!["sw", "--v", "inf", "--format", "json"],
        vec![
            "cantor-schedule",
            "--v",
            "2",
            "--vhat",
            "1/2",
            "--pad",
            "8",
            "--levels",
            "4",
            "--format",
            "json",
        ],
        vec!["examples", "--format", "json"],
    ] {
        let (out, err, code) = run(&args);
        assert_eq!(code, Some(0), "{args:?} failed: {err}");
        serde_json::from_str::<serde_json::Value>(out.trim())
            .unwrap_or_else(|e| panic!("bad json from {args:?}: {e}"));
    }
}

#[test]
fn error_exit_codes() {
    // Domain error → exit 1 with a structured object on stderr.
    let (_, err, code) = run(&["beta-n", "--beta", "poly:-1,-1,1@[1,2]", "--n", "1"]);
    assert_eq!(code, Some(1));
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "degenerate_equation");

    let (_, err, code) = run(&["admissible", "--beta", "dec:0.5", "--word", "1"]);
    assert_eq!(code, Some(1));
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "not_greater_than_one");
}

#[test]
fn speedfn_cap1_suffix() {
    let (out, _, code) = run(&[
        "psi-exp",
        "--psi",
        "rule(index=arith:2,0, rate=-1); rule(index=all, rate=1); cap1",
        "--format",
        "json",
    ]);
    assert_eq!(code, Some(0));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["lo"], "0");
    assert_eq!(v["hi"], "1");
}
