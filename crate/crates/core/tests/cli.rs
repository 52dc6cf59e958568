//! End-to-end checks of the `st` binary: trace formats, exit codes, and the
//! one-shot `apply` subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn st(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_st"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_corpus(trace: &str) -> Output {
    let proof = corpus("gradient.proof");
    let rules: Vec<PathBuf> =
        ["twoscale.rules", "green.rules", "hypothesis.rules"]
            .iter()
            .map(|n| corpus(n))
            .collect();
    st(&[
        "run",
        proof.to_str().unwrap(),
        "--rules",
        rules[0].to_str().unwrap(),
        "--rules",
        rules[1].to_str().unwrap(),
        "--rules",
        rules[2].to_str().unwrap(),
        "--trace",
        trace,
    ])
}

/// Writes a scratch input file for failure-path tests.
fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join(format!("st-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("scratch file");
    path
}

#[test]
fn run_without_trace_prints_only_the_final_term() {
    let out = run_corpus("none");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1);
    assert!(
        lines[0].starts_with("Integral(prod(Omega, Y), dot(grad(x, u0), v)"),
        "unexpected final term: {}",
        lines[0]
    );
}

#[test]
fn text_trace_shows_each_step_with_input_and_output() {
    let out = run_corpus("text");
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for step in 1..=9 {
        assert!(stdout.contains(&format!("step {step}: ")), "missing step {step}");
    }
    assert!(stdout.contains("  input:   Integral(prod(Omega, Y), dot(T(grad(x, u)), v), [dx, dy])"));
    assert!(stdout.contains("  output:  Integral(Omega, dot(grad(x, u), Tstar(v)), [dx])"));
    assert!(stdout.contains("  elapsed: "));
}

#[test]
fn json_trace_emits_one_record_per_step() {
    let out = run_corpus("json");
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines: Vec<&str> = stdout.lines().collect();
    let final_term = lines.pop().unwrap();
    assert!(final_term.starts_with("Integral("));
    assert_eq!(lines.len(), 9);
    for (i, line) in lines.iter().enumerate() {
        let v: serde_json::Value =
            serde_json::from_str(line).expect("trace lines are JSON");
        assert_eq!(v["step"], i as u64 + 1);
        for key in ["strategy", "input", "output", "fresh", "elapsed_us"] {
            assert!(!v[key].is_null(), "record {i} lacks `{key}`");
        }
    }
}

#[test]
fn failed_expectations_exit_1_with_both_sides() {
    let proof = scratch(
        "failing.proof",
        "apply Identity to a;\nexpect b modulo oeps;\n",
    );
    let out = st(&["run", proof.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("expectation failed"), "stderr: {stderr}");
    assert!(stderr.contains("expected: b"));
    assert!(stderr.contains("actual:   a"));
}

#[test]
fn syntax_errors_exit_2_with_a_position() {
    let proof = scratch("broken.proof", "apply ;\n");
    let out = st(&["run", proof.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 1"), "stderr: {stderr}");
}

#[test]
fn missing_files_exit_2() {
    let out = st(&["run", "/nonexistent/path.proof"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn time_limit_exits_1() {
    let rules = scratch("swap.rules", "Swap := [f(a_, b_), f(b, a)];\n");
    let proof = scratch(
        "spin.proof",
        "apply Normalizer(FailAsIdentity(Transform(Swap))) to f(p, q);\n",
    );
    let out = st(&[
        "run",
        proof.to_str().unwrap(),
        "--rules",
        rules.to_str().unwrap(),
        "--time-limit",
        "50ms",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("time limit exceeded"));
}

#[test]
fn apply_rewrites_a_term_once() {
    let rules = corpus("twoscale.rules");
    let out = st(&[
        "apply",
        "--rules",
        rules.to_str().unwrap(),
        "--strategy",
        "TopDown(Transform(ApproxTstar))",
        "--term",
        "Tstar(q)",
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim_end(),
        "B(q) + Oeps(0)"
    );
}

#[test]
fn apply_reports_strategy_failure_as_fail() {
    let out = st(&["apply", "--strategy", "Fail", "--term", "a"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim_end(), "Fail");
}

#[test]
fn apply_rejects_unknown_strategy_names() {
    let out = st(&["apply", "--strategy", "Transform(Nope)", "--term", "a"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("unknown name `Nope`"));
}
