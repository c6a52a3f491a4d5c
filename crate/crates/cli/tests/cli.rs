mod common;

use common::*;
use serde_json::Value;

#[test]
fn scores_emit_unquoted_formula() {
    let dir = tempfile::tempdir().unwrap();
    let (table, examples) = cli_files(dir.path(), &score_body());
    let out = run(&["suggest", "--input", table.to_str().unwrap(), "--examples", examples.to_str().unwrap(), "--emit", "formula"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("B2<5"));
    assert!(text.lines().count() <= 3);
}

#[test]
fn top_limits_output_and_mask_is_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (table, examples) = cli_files(dir.path(), &work_order_body());
    let args = ["suggest", "--input", table.to_str().unwrap(), "--examples", examples.to_str().unwrap()];
    let out = run(&[&args[..], &["--top", "2"]].concat());
    let rules: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!rules.is_empty() && rules.len() <= 2);
    let out = run(&[&args[..], &["--emit", "mask", "--top", "1"]].concat());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "highlight#1");
    assert_eq!(lines.len(), 9);
    assert!(lines[1..].iter().all(|l| *l == "true" || *l == "false"));
}

#[test]
fn missing_examples_is_a_usage_error() {
    let out = run(&["suggest", "--input", "t.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn input_errors_exit_one_and_learning_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let table = file(dir.path(), "t.csv", "x\n1\n1\n1\n");
    let examples = file(dir.path(), "e.json", r#"{"column":"x","examples":[{"row":0,"format":"f"}]}"#);
    let out = run(&["suggest", "--input", table.to_str().unwrap(), "--examples", examples.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NoPredicates"));

    let bad = file(dir.path(), "b.json", r#"{"column":"x","examples":[{"row":9,"format":"f"}]}"#);
    let out = run(&["suggest", "--input", table.to_str().unwrap(), "--examples", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["suggest", "--input", "/nonexistent.csv", "--examples", examples.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn weights_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (table, examples) = cli_files(dir.path(), &score_body());
    let weights = file(dir.path(), "w.json", r#"{"bias": 0}"#);
    let out = std::process::Command::new(bin())
        .args(["suggest", "--input", table.to_str().unwrap(), "--examples", examples.to_str().unwrap()])
        .env("CFSYNTH_WEIGHTS", &weights)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ConfigError"));
}

#[test]
fn apply_prints_mask_and_formula() {
    let dir = tempfile::tempdir().unwrap();
    let table = file(dir.path(), "t.csv", score_body()["table"].as_str().unwrap());
    let rule = file(dir.path(), "r.json", &cfsynth_core::testkit::scenarios::less_than_five().to_json());
    let out = run(&["apply", "--input", table.to_str().unwrap(), "--column", "Score", "--rule", rule.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["formula"], "B2<5");
    assert_eq!(v["mask"].as_array().unwrap().iter().filter(|b| b.as_bool().unwrap()).count(), 4);
}

#[test]
fn dumps_response_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (table, examples) = cli_files(dir.path(), &work_order_body());
    let resp = dir.path().join("resp.json");
    let trace = dir.path().join("trace.json");
    let out = run(&[
        "suggest",
        "--input",
        table.to_str().unwrap(),
        "--examples",
        examples.to_str().unwrap(),
        "--dump-response",
        resp.to_str().unwrap(),
        "--dump-trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(resp).unwrap()).unwrap();
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    let dumped: Vec<&Value> = r["formats"]["highlight"].as_array().unwrap().iter().map(|s| &s["rule"]).collect();
    assert_eq!(printed.as_array().unwrap().iter().collect::<Vec<_>>(), dumped);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(trace).unwrap()).unwrap();
    assert!(!t["cluster_rounds"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn cli_and_http_rules_are_byte_identical() {
    for body in [work_order_body(), refined_body(), score_body()] {
        let dir = tempfile::tempdir().unwrap();
        let (table, examples) = cli_files(dir.path(), &body);
        let mut args = vec!["suggest", "--input", table.to_str().unwrap(), "--examples", examples.to_str().unwrap()];
        if body["options"]["fold_negations"] == true {
            args.push("--not-folding");
        }
        let out = run(&args);
        let (_, resp) = post_raw("/v1/suggest", &body).await;
        assert_eq!(response_rules(&resp).as_bytes(), out.stdout.trim_ascii_end());
    }
}
