//! End-to-end tests for the `ppres` binary: output shape and the exit-code
//! contract (0 success/pass, 1 counterexample, 2 bad input, 3 ineligible,
//! 4 missing binding, 5 expansion budget exceeded).

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ppres"))
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary launches")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn json(out: &Output) -> Value {
    serde_json::from_str(stdout(out).trim()).expect("stdout is one JSON object")
}

#[test]
fn parse_prints_a_fixed_point() {
    let first = run(&["parse", "--inline", "E y. 2*y = x /\\ ~(x < 0)"]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let text = stdout(&first).trim().to_string();
    let second = run(&["parse", "--inline", &text]);
    assert_eq!(stdout(&second).trim(), text);
}

#[test]
fn parse_reports_errors_with_exit_2() {
    let out = run(&["parse", "--inline", "E y. 2*y ="]);
    assert_eq!(code(&out), 2);
    assert!(!stderr(&out).is_empty());
}

#[test]
fn parse_json_has_the_stable_keys() {
    let out = run(&["parse", "--json", "--inline", "E y. 2*y = x"]);
    let v = json(&out);
    assert_eq!(v["command"], "parse");
    assert_eq!(v["input"], "<inline>");
    assert!(v["result"].is_string());
    assert_eq!(v["stats"]["unbounded"], 1);
    assert_eq!(v["stats"]["free_vars"], serde_json::json!(["x"]));
}

#[test]
fn eval_decides_interval_membership() {
    let cases = [("5", "true"), ("3", "false")];
    for (x, want) in cases {
        let out = run(&[
            "eval",
            &corpus("intervals.pp"),
            "-t",
            "2",
            "-a",
            &format!("x={x}"),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert_eq!(stdout(&out).trim(), want, "x={x}");
    }
}

#[test]
fn eval_treats_zero_modulus_as_false() {
    let out = run(&["eval", "--inline", "D[t](x)", "-t", "0", "-a", "x=7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "false");
}

#[test]
fn eval_uses_the_ground_oracle_for_unbounded_quantifiers() {
    let out = run(&["eval", "--json", &corpus("sec21.pp"), "-t", "3", "-a", "a1=-4", "-a", "a2=9"]);
    let v = json(&out);
    assert_eq!(v["result"], true);
    assert_eq!(v["stats"]["decider"], "cooper");
}

#[test]
fn eval_without_a_binding_exits_4() {
    let out = run(&["eval", &corpus("intervals.pp"), "-t", "2"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("x"), "{}", stderr(&out));
}

#[test]
fn eliminate_reports_no_unbounded_quantifiers_left() {
    let out = run(&["eliminate", "--json", &corpus("sec21.pp")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["stats"]["unbounded_before"], 1);
    assert_eq!(v["stats"]["unbounded_after"], 0);
}

#[test]
fn qfree_rejects_parametric_coefficients_with_exit_3() {
    for args in [
        vec!["qfree".to_string(), corpus("tdivides.pp")],
        vec!["eliminate".to_string(), "--qfree".to_string(), corpus("tdivides.pp")],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&args);
        assert_eq!(code(&out), 3, "{}", stderr(&out));
        assert!(
            stderr(&out).contains("depends on t"),
            "{}",
            stderr(&out)
        );
    }
}

#[test]
fn qfree_stops_at_the_expansion_budget_with_exit_5() {
    let out = run(&["qfree", "--inline", "E y. D[2000003](y - x)"]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    assert!(stderr(&out).contains("expansion exceeded"), "{}", stderr(&out));
}

#[test]
fn qfree_turns_halving_into_a_parity_test() {
    let out = run(&["qfree", "--inline", "E y. 2*y = x"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("D[2]"), "{}", stdout(&out));
}

#[test]
fn check_passes_on_identical_formulas() {
    let out = run(&[
        "check",
        "--inline",
        "x < 0 \\/ D[2](x)",
        "x < 0 \\/ D[2](x)",
        "--t-max",
        "3",
        "--box",
        "5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("pass"));
}

#[test]
fn check_counterexample_exits_1_with_a_witness() {
    let out = run(&[
        "check", "--json", "--inline", "x < 0", "0 < x", "--t-max", "3", "--box", "5",
    ]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["result"], "counterexample");
    assert_eq!(v["witness"]["t"], 0);
    let x: i64 = v["witness"]["assignment"]["x"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    // The witness must actually distinguish the two sides.
    assert_ne!(v["witness"]["lhs"], v["witness"]["rhs"]);
    assert_ne!(x < 0, 0 < x, "x={x} does not separate the formulas");
}

#[test]
fn count_reproduces_the_interval_family_growth() {
    let out = run(&[
        "count",
        &corpus("intervals.pp"),
        "--t-range",
        "1",
        "5",
        "--box",
        "0",
        "2t^2+t",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for line in ["t=1 count=2", "t=2 count=6", "t=5 count=30"] {
        assert!(text.contains(line), "{text}");
    }
}

#[test]
fn count_fit_reports_an_exact_quadratic() {
    let out = run(&[
        "count",
        "--json",
        &corpus("intervals.pp"),
        "--t-range",
        "1",
        "8",
        "--box",
        "0",
        "2t^2+t",
        "--fit",
        "1",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["result"][0]["count"], 2);
    assert_eq!(v["result"][7]["count"], 72);
    assert_eq!(v["stats"]["fit"]["exact"], true);
    assert!(v["stats"]["fit"]["classes"][0]["poly"].is_string());
}

#[test]
fn thread_cap_is_honored_and_validated() {
    let ok = bin()
        .env("PPRES_THREADS", "1")
        .args(["eval", "--inline", "0 < 1", "-t", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let bad = bin()
        .env("PPRES_THREADS", "many")
        .args(["eval", "--inline", "0 < 1", "-t", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn unreadable_file_exits_2() {
    let out = run(&["parse", "/nonexistent/formula.pp"]);
    assert_eq!(code(&out), 2);
}
