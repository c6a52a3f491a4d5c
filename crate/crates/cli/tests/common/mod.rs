#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cfsynth::service::{router, DEFAULT_BODY_LIMIT};
use cfsynth_core::testkit::scenarios::{scores_csv, WORK_ORDERS, WORK_ORDER_EXAMPLE, WORK_ORDER_REFINEMENT};
use cfsynth_core::Engine;
use http_body_util::BodyExt;
use serde::Deserialize;
use serde_json::value::RawValue;
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn app() -> Router {
    router(Arc::new(Engine::default()), DEFAULT_BODY_LIMIT)
}

pub async fn send(app: Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub async fn post(app: Router, path: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::post(path)
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap();
    send(app, req).await
}

pub async fn post_json(path: &str, body: &Value) -> (StatusCode, Value) {
    let (status, bytes) = post(app(), path, body.to_string()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

pub fn work_orders_csv() -> String {
    std::iter::once("WO").chain(WORK_ORDERS).collect::<Vec<_>>().join("\n")
}

pub fn work_order_body() -> Value {
    json!({
        "table": work_orders_csv(),
        "column": "WO",
        "examples": [{"row": WORK_ORDER_EXAMPLE, "format": "highlight"}],
    })
}

pub fn refined_body() -> Value {
    json!({
        "table": work_orders_csv(),
        "column": "WO",
        "examples": [
            {"row": WORK_ORDER_REFINEMENT, "format": "highlight"},
            {"row": WORK_ORDER_EXAMPLE, "format": "highlight"},
        ],
        "options": {"fold_negations": true},
    })
}

pub fn score_body() -> Value {
    json!({
        "table": scores_csv(),
        "column": "Score",
        "examples": [{"row": 1, "format": "highlight"}, {"row": 3, "format": "highlight"}],
    })
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cfsynth")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env_remove("CFSYNTH_WEIGHTS").output().unwrap()
}

/// Writes `text` to `name` inside `dir`.
pub fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Writes a suggest body's table and examples as CLI input files.
pub fn cli_files(dir: &Path, body: &Value) -> (PathBuf, PathBuf) {
    let table = file(dir, "table.csv", body["table"].as_str().unwrap());
    let examples = json!({"column": body["column"], "examples": body["examples"]});
    (table, file(dir, "examples.json", &examples.to_string()))
}

#[derive(Deserialize)]
struct RawResponse<'a> {
    #[serde(borrow)]
    formats: BTreeMap<String, Vec<RawSuggestion<'a>>>,
}

#[derive(Deserialize)]
struct RawSuggestion<'a> {
    #[serde(borrow)]
    rule: &'a RawValue,
}

/// Rule JSON of every suggestion in a service response body, bytes as
/// sent, in CLI order.
pub fn response_rules(body: &[u8]) -> String {
    let resp: RawResponse = serde_json::from_slice(body).unwrap();
    let rules: Vec<&str> = resp.formats.values().flatten().map(|s| s.rule.get()).collect();
    format!("[{}]", rules.join(","))
}

pub async fn post_raw(path: &str, body: &Value) -> (StatusCode, Vec<u8>) {
    post(app(), path, body.to_string()).await
}
