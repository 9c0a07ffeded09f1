//! Exit codes and output shapes of the command-line interface.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relfrag")).args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_relfrag"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn equivalence_verdicts_and_exit_codes() {
    let o = run(&["--json", "equiv", "--lhs", "D;D", "--rhs", "top"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["verdict"], "inequivalent");
    assert_eq!(v["witness"]["size"], 1);
    assert!(v["checked"].is_null());

    let o = run(&["--json", "equiv", "--lhs", "D;D", "--rhs", "top", "--mode", "rel>=3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["verdict"], "equivalent");

    let o = run(&["--json", "equiv", "--words", "--lhs", "cD cD", "--rhs", "cD cD cD"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["verdict"], "equivalent");

    let o = run(&["equiv", "--words", "--lhs", "iI", "--rhs", "iD"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn term_queries() {
    assert_eq!(json(&run(&["--json", "vo", "a ; a^"]))["vo"], 2);
    let v = json(&run(&["--json", "level", "a $ D"]));
    assert_eq!((v["sigma_level"].as_u64(), v["pi_level"].as_u64()), (Some(2), Some(1)));
    let o = run_stdin(&["--json", "eval", "a ; a^", "--structure", "-"], r#"{"size":2,"relations":{"a":[[0,1]]}}"#);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["pairs"], serde_json::json!([[0, 0]]));
    let o = run(&["nf", "projection", "(a ; b)^"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "b^ ; a^");
}

#[test]
fn word_commands() {
    let o = run(&["--json", "normalize", "--word", "cD cD cD", "--trace"]);
    let v = json(&o);
    assert_eq!(v["normal_form"], "cD cD");
    assert_eq!(v["steps"][0]["rule"], 13);
    assert_eq!(json(&run(&["--json", "count-irreducible"]))["count"], 1810);
    let v = json(&run(&["--json", "cofinite", "builtin:figure1"]));
    assert_eq!((v["cofinite"].as_bool(), v["max_length"].as_u64()), (Some(true), Some(28)));
    let v = json(&run(&["--json", "enumerate-irreducible", "--limit", "3"]));
    assert_eq!(v["words"], serde_json::json!(["eps", "iI", "iD"]));
    let dot = String::from_utf8(run(&["export-dfa", "--minimal"]).stdout).unwrap();
    assert!(dot.starts_with("digraph"));
}

#[test]
fn rule_files_round_trip_through_search_output() {
    let dir = std::env::temp_dir().join(format!("relfrag-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("rules.txt");
    let o = run(&["search", "--max-len", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = run(&["--json", "count-irreducible", "--rules", out.to_str().unwrap()]);
    // Seven short rules leave infinitely many irreducible words.
    assert_eq!(code(&o), 65, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["--json", "cofinite", out.to_str().unwrap()]);
    assert_eq!(json(&o)["cofinite"], false);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exports() {
    let o = run(&["export-smt", "--lhs", "(a;D);D", "--rhs", "a;top"]);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("(declare-fun a (U U) Bool)") && s.trim_end().ends_with("(check-sat)"));
    let o = run(&["export-tptp", "--words", "--lhs", "cD cD", "--rhs", "cD cD cD"]);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("fof(equation, conjecture,"));
}

#[test]
fn error_exit_codes() {
    assert_eq!(code(&run(&["no-such-command"])), 64);
    assert_eq!(code(&run(&["--threads", "0", "vo", "a"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["level", "a ;"])), 65);
    assert_eq!(code(&run(&["normalize", "--word", "iI zz"])), 65);
    assert_eq!(code(&run(&["eval", "a", "--structure", "/nonexistent/structure.json"])), 74);
    assert_eq!(code(&run(&["equiv", "--lhs", "a", "--rhs", "a", "--mode", "nonsense"])), 64);
}
