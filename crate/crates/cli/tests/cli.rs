use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn corpus(name: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus");
    dir.join(format!("{name}.eo")).display().to_string()
}

fn eo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eo")).args(args).output().expect("run eo")
}

fn eo_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_eo"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn eo");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn check_prints_type_and_valueness() {
    let o = eo(&["check", &corpus("tree")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("valueness: val"), "{out}");
    assert!(out.starts_with("type: all %a."), "{out}");
}

#[test]
fn json_records_have_the_four_fields() {
    let v = json(&eo(&["--json", "check", &corpus("identity")]));
    assert_eq!(v["command"], "check");
    assert_eq!(v["verdict"], "ok");
    assert!(v["input"].as_str().unwrap().ends_with("identity.eo"));
    assert_eq!(v["payload"]["valueness"][0], "val");
}

#[test]
fn elaborate_shows_both_instances() {
    let v = json(&eo(&["elaborate", "--json", &corpus("identity")]));
    assert_eq!(v["payload"]["elaborations"][0]["term"], "(\\x. x, \\x. force x)");
    assert_eq!(v["payload"]["type"], "(1 -> 1) * (U 1 -> 1)");
}

#[test]
fn run_ignores_a_diverging_argument() {
    let o = eo(&["run", "--trace", &corpus("ignore_divergence")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("value after 1 steps: ()"), "{}", stdout(&o));
    let v = json(&eo(&["--json", "src-run", "--fuel", "50", &corpus("ignore_divergence")]));
    assert_eq!(v["verdict"], "out-of-fuel");
    assert_eq!(v["payload"]["steps"], 50);
}

#[test]
fn steps_lists_both_flavors() {
    let v = json(&eo(&["--json", "steps", &corpus("project")]));
    let steps = v["payload"]["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 2);
    assert!(steps.iter().any(|s| s["flavor"] == "byname" && s["path"].as_array().unwrap().is_empty()));
}

#[test]
fn freeness_reports_every_level() {
    let v = json(&eo(&["--json", "freeness", &corpus("identity_by_name")]));
    assert_eq!(v["payload"]["impartial"], Value::Null);
    assert_eq!(v["payload"]["econ"], false);
    assert_eq!(v["payload"]["targets"][0]["n_free"], false);
}

#[test]
fn verify_a_file_and_the_enumeration() {
    let o = eo(&["verify", &corpus("identity_by_value")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("consistency identity_by_value pass"));
    let v = json(&eo(&["--json", "verify", "--enumerate", "3"]));
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["payload"]["counts"]["economizing"]["pass"], 144);
}

#[test]
fn type_errors_exit_with_one() {
    let o = eo_stdin(&["--json", "check", "-"], "#lang impartial\n(() : 1 -[V]> 1)\n");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "type-error");
}

#[test]
fn parse_and_usage_errors_exit_with_two() {
    let o = eo_stdin(&["check", "-"], "#lang impartial\n(( : 1)\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("2:4"), "{}", stdout(&o));
    assert_eq!(eo(&["verify"]).status.code(), Some(2));
    assert_eq!(eo(&["check", "/nonexistent/file.eo"]).status.code(), Some(2));
    assert_eq!(eo(&["frobnicate"]).status.code(), Some(2));
}
