//! End-to-end checks of the binary: documented invocations, exit codes,
//! and output determinism.

use std::process::{Command, Output};

fn tropmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropmod"))
        .args(args)
        .env_remove("TROPMOD_CAP")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn toric_rank_example() {
    let out = tropmod(&["toric-rank", "--functor", "gamma0", "-p", "37", "-n", "2", "-M", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "6\n");
}

#[test]
fn component_group_example() {
    let out = tropmod(&[
        "component-group", "--functor", "gamma0", "-p", "13", "-n", "2",
        "--normalization", "krir", "--odd-part",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "trivial\n");
}

#[test]
fn component_group_with_structure() {
    let out = tropmod(&[
        "component-group", "-p", "37", "-n", "2", "--normalization", "krir", "--odd-part",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "Z/3 x Z/3 x Z/171 x Z/513\n");
}

#[test]
fn tamagawa_spot_value() {
    let out = tropmod(&["tamagawa", "-p", "37", "-n", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "808455168\n");
}

#[test]
fn domain_errors_exit_one_with_diagnostic() {
    for args in [
        vec!["toric-rank", "-p", "4"],
        vec!["skeleton", "-p", "5", "-M", "10"],
        vec!["component-group", "--functor", "sp", "-p", "13", "-n", "2"],
    ] {
        let out = tropmod(&args);
        assert_eq!(out.status.code(), Some(1), "args: {args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.starts_with("error: "), "stderr: {err}");
        assert_eq!(err.trim_end().lines().count(), 1, "one-line diagnostic: {err}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn usage_error_exits_one() {
    let out = tropmod(&["toric-rank"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dot_output_is_deterministic() {
    let a = tropmod(&["skeleton", "-p", "11", "-n", "2", "--format", "dot"]);
    let b = tropmod(&["skeleton", "-p", "11", "-n", "2", "--format", "dot"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_of(&a);
    assert!(text.starts_with("graph skeleton {"));
    // rational lengths always carry an explicit denominator
    assert!(text.contains('/'));
}

#[test]
fn brute_force_skeleton_matches_closed_route() {
    let closed = tropmod(&["skeleton", "--functor", "sp", "-p", "5", "-n", "2", "--format", "dot"]);
    let brute = tropmod(&[
        "skeleton", "--functor", "sp", "-p", "5", "-n", "2", "--format", "dot",
        "--brute-force", "--cap", "100000",
    ]);
    assert!(closed.status.success() && brute.status.success());
    assert_eq!(closed.stdout, brute.stdout);
}

#[test]
fn verify_single_criterion() {
    let out = tropmod(&["verify", "--suite", "2"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("criterion 2"));
    assert!(text.contains(": pass"));
}

#[test]
fn verify_rejects_unknown_criterion() {
    let out = tropmod(&["verify", "--suite", "11"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cap_env_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_tropmod"))
        .args(["skeleton", "-p", "11", "--brute-force"])
        .env("TROPMOD_CAP", "10")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("cap"), "stderr: {err}");
}

#[test]
fn json_report_round_trips() {
    let out = tropmod(&["skeleton", "-p", "11", "--format", "json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("valid json");
    assert_eq!(value["p"], 11);
    assert_eq!(value["toric_rank"], 1);
    assert_eq!(value["graph"]["edges"].as_array().unwrap().len(), 4);
}
