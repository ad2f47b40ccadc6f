//! End-to-end runs of the `residuum` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(file: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", file].iter().collect()
}

fn residuum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_residuum"))
        .args(args)
        .env_remove("RESIDUUM_SYSTEM")
        .current_dir(corpus(""))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn json_output_matches_golden() {
    let o = residuum(&["check", "--system", "reentrancy", "--format", "json", "nested_transaction.eff"]);
    assert_eq!(o.status.code(), Some(1));
    let got: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let golden = std::fs::read_to_string(corpus("nested_transaction.golden.json")).unwrap();
    let want: serde_json::Value = serde_json::from_str(&golden).unwrap();
    assert_eq!(got, want);
    let keys: Vec<&str> = got[0].as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected = ["file", "line", "col", "endLine", "endCol", "kind", "message", "sofar", "target", "system"];
    expected.sort_unstable();
    let mut keys = keys;
    keys.sort_unstable();
    assert_eq!(keys, expected);
}

#[test]
fn text_and_json_report_the_same_diagnostics() {
    let files = ["append.eff", "content_equals.eff", "atomicity_two_violations.eff"];
    let mut args = vec!["check", "--system", "atomicity"];
    args.extend(files);
    let text = stdout(&residuum(&args));
    args.extend(["--format", "json"]);
    let json: Vec<serde_json::Value> = serde_json::from_slice(&residuum(&args).stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), json.len());
    for (line, j) in lines.iter().zip(&json) {
        let head = format!("{}:{}:{}: {}: ", j["file"].as_str().unwrap(), j["line"], j["col"], j["kind"].as_str().unwrap());
        assert!(line.starts_with(&head), "{line} vs {head}");
        assert!(line.contains(&format!("[sofar={}, target={}]", j["sofar"].as_str().unwrap(), j["target"].as_str().unwrap())));
    }
    let mut sorted = lines.clone();
    sorted.sort_by_key(|l| l.split(':').next().unwrap().to_string());
    assert_eq!(lines, sorted);
}

#[test]
fn clean_and_empty_files_exit_zero() {
    let o = residuum(&["check", "--system", "reentrancy", "--format", "json", "transaction.eff", "empty.eff"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap(), serde_json::json!([]));
}

#[test]
fn max_errors_truncates_output_only() {
    let o = residuum(&["check", "--system", "lift:x,y,z", "--max-errors", "1", "lift_two_violations.eff"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).lines().count(), 1);
    let o = residuum(&["check", "--system", "lift:x,y,z", "--max-errors", "0", "lift_two_violations.eff"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
}

#[test]
fn system_key_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_residuum"))
        .args(["check", "nested_begin.eff"])
        .env("RESIDUUM_SYSTEM", "reentrancy")
        .current_dir(corpus(""))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("nested_begin.eff:4:5: UndefinedSeq"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_two() {
    let o = residuum(&["check", "--system", "bogus", "no_such_file.eff"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown system"));
    assert_eq!(residuum(&["check", "append.eff"]).status.code(), Some(2));
    assert_eq!(residuum(&["check", "--system", "atomicity", "--format", "xml", "append.eff"]).status.code(), Some(2));
    assert_eq!(residuum(&["verify", "--system", "trace:a,b"]).status.code(), Some(2));
}

#[test]
fn unreadable_and_malformed_inputs_are_diagnostics() {
    let o = residuum(&["check", "--system", "atomicity", "no_such_file.eff"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("IoError"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.eff");
    std::fs::write(&bad, "fn f( -> unit @effect(A) { }").unwrap();
    let o = residuum(&["check", "--system", "atomicity", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("SyntaxError"));
}

#[test]
fn laws_command() {
    let ok = residuum(&["laws", "--system", "atomicity"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let broken = residuum(&["laws", "--system", "custom:broken_quantale.json"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stdout(&broken).contains("counterexample"));
    assert_eq!(residuum(&["laws", "--system", "custom:two_point.json"]).status.code(), Some(0));
    let trace = residuum(&["laws", "--system", "trace:a,b", "--samples", "1000"]);
    assert_eq!(trace.status.code(), Some(0), "{}", stdout(&trace));
}

#[test]
fn verify_command() {
    let o = residuum(&["verify", "--system", "reentrancy", "--max-nodes", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("divergences: 0"));
}

#[test]
fn explain_command() {
    let o = residuum(&["explain", "--system", "atomicity", "--seq", "atomic,atomic", "--bound", "A"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("step 1: atomic: sofar=A remaining=L"), "{out}");
    assert!(out.contains("step 2: atomic: sofar=T remaining=UNDEFINED"), "{out}");
    let o = residuum(&["explain", "--system", "reentrancy", "--seq", "begin", "--bound", "entrant"]);
    assert!(stdout(&o).contains("remaining=unlocking"), "{}", stdout(&o));
}

#[test]
fn custom_system_checks_programs() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("p.eff");
    std::fs::write(&src, "fn f() -> unit @effect(pure) {\n    perform skip;\n    perform print\n}\n").unwrap();
    let o = residuum(&["check", "--system", "custom:two_point.json", src.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(":3:5: ResidualUndefined"), "{}", stdout(&o));
}
