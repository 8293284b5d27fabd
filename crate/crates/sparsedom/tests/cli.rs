use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsedom")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "id": "small",
  "space": {"generate": {"kind": "uniform_tree", "arity": 2, "depth": 4}},
  "weight": {"kind": "random", "spread": 0.3},
  "dim": 2,
  "checks": ["maximal", "endpoint"]
}"#;

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SMALL);
    let out = dir.path().join("out");
    let o = run(&["verify", "--scenario", &scenario, "--out", out.to_str().unwrap(), "--certify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().count() >= 2);
    assert!(csv.contains("maximal-ap") && csv.contains("endpoint-m"));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["instances"], 1);
}

#[test]
fn campaign_and_seed_flags() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SMALL);
    let o = run(&["constants", "--scenario", &scenario, "--campaign", "3", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("instances 3"));
}

#[test]
fn decompose_reports_the_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SMALL);
    let o = run(&["decompose", "--scenario", &scenario]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("decomposition small"));
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"id\": \"x\", \"space\": 3}");
    assert_eq!(run(&["verify", "--scenario", &bad]).status.code(), Some(2));
    let unknown = write(dir.path(), "u.json", &SMALL.replace("\"dim\"", "\"dimension\""));
    assert_eq!(run(&["verify", "--scenario", &unknown]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["demo", "--seed", "abc"]).status.code(), Some(2));
}

#[test]
fn failed_certificate_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    // an indefinite explicit weight fails when the instance is built
    let text = r#"{
      "id": "indefinite",
      "space": {"points": [{"id": 0, "mass": 1}, {"id": 1, "mass": 1}], "metric": {"line": [0, 1]}},
      "weight": {"kind": "explicit", "values": [[1], [-1]]},
      "operator": {"kind": "identity"},
      "decompose": false
    }"#;
    let scenario = write(dir.path(), "f.json", text);
    let o = run(&["verify", "--scenario", &scenario, "--certify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("certificate failed"));
}

#[test]
fn missing_file_is_an_error() {
    let o = run(&["constants", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(1));
}
