mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use cfsynth::service::router;
use cfsynth_core::testkit::scenarios::{gw_rule, WORK_ORDERS};
use cfsynth_core::Engine;
use common::*;
use serde_json::{json, Value};

fn gw_mask() -> Vec<Value> {
    WORK_ORDERS
        .iter()
        .map(|s| Value::Bool(s.starts_with("GW") && !s.ends_with("-F") && !s.ends_with("-T")))
        .collect()
}

#[tokio::test]
async fn health_is_ok() {
    let req = Request::get("/v1/health").body(Body::empty()).unwrap();
    let (status, body) = send(app(), req).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, br#"{"status":"ok"}"#);
}

#[tokio::test]
async fn work_orders_suggest_gw_rule() {
    let (status, resp) = post_json("/v1/suggest", &work_order_body()).await;
    assert_eq!(status, StatusCode::OK);
    let list = resp["formats"]["highlight"].as_array().unwrap();
    assert!(list.len() <= 3);
    assert!(list.iter().any(|s| s["mask"].as_array().unwrap() == &gw_mask()), "{resp}");
    for s in list {
        assert!(s["formula"].is_string() && s["score"].is_number() && s["features"].is_object());
    }
    assert_eq!(resp["diagnostics"]["column_type"], "text");
}

#[tokio::test]
async fn responses_are_deterministic() {
    let strip = |mut v: Value| {
        v["diagnostics"]["elapsed_ms"] = json!(0);
        v.to_string()
    };
    let (_, a) = post_json("/v1/suggest", &refined_body()).await;
    let (_, b) = post_json("/v1/suggest", &refined_body()).await;
    assert_eq!(strip(a), strip(b));
}

#[tokio::test]
async fn schema_errors_name_the_field() {
    let mut body = work_order_body();
    body.as_object_mut().unwrap().remove("examples");
    let (status, resp) = post_json("/v1/suggest", &body).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(resp["error"]["code"], "SchemaError");
    assert_eq!(resp["error"]["path"], "/examples");

    let mut body = work_order_body();
    body["examples"][0]["row"] = json!("three");
    let (status, resp) = post_json("/v1/suggest", &body).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(resp["error"]["path"], "/examples/0/row");

    let (status, resp) = post(app(), "/v1/suggest", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let resp: Value = serde_json::from_slice(&resp).unwrap();
    assert_eq!(resp["error"]["code"], "SchemaError");
}

#[tokio::test]
async fn bad_requests_and_unlearnable_columns() {
    let mut body = work_order_body();
    body["examples"][0]["row"] = json!(40);
    let (status, resp) = post_json("/v1/suggest", &body).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(resp["error"]["code"], "InvalidAnnotation");

    let body = json!({"table": "x\n1\n1\n1", "column": "x", "examples": [{"row": 0, "format": "f"}]});
    let (status, resp) = post_json("/v1/suggest", &body).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(resp["error"]["code"], "NoPredicates");

    let mut body = work_order_body();
    body["top_k"] = json!(0);
    let (status, resp) = post_json("/v1/suggest", &body).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(resp["error"]["code"], "ConfigError");
}

#[tokio::test]
async fn two_formats_key_the_response() {
    let mut body = work_order_body();
    body["examples"] = json!([
        {"row": 1, "format": "red"},
        {"row": 3, "format": "green"},
        {"row": 6, "format": "red"},
    ]);
    let (status, resp) = post_json("/v1/suggest", &body).await;
    assert_eq!(status, StatusCode::OK);
    let keys: Vec<&String> = resp["formats"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["green", "red"]);
}

#[tokio::test]
async fn column_json_tables_are_accepted() {
    let body = json!({
        "table": {"name": "WO", "values": WORK_ORDERS},
        "column": "WO",
        "examples": [{"row": 3, "format": "highlight"}],
    });
    let (status, a) = post_raw("/v1/suggest", &body).await;
    assert_eq!(status, StatusCode::OK);
    let (_, b) = post_raw("/v1/suggest", &work_order_body()).await;
    assert_eq!(response_rules(&a), response_rules(&b));
}

#[tokio::test]
async fn oversize_and_wrong_media_type() {
    let small = router(Arc::new(Engine::default()), 64);
    let (status, body) = post(small, "/v1/suggest", work_order_body().to_string()).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    let body: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(body["error"]["code"], "PayloadTooLarge");

    let req = Request::post("/v1/suggest")
        .header("content-type", "text/plain")
        .body(Body::from(work_order_body().to_string()))
        .unwrap();
    let (status, _) = send(app(), req).await;
    assert_eq!(status, StatusCode::UNSUPPORTED_MEDIA_TYPE);
}

#[tokio::test]
async fn apply_returns_mask_and_formula() {
    let body = json!({
        "table": work_orders_csv(),
        "column": "WO",
        "rule": serde_json::from_str::<Value>(&gw_rule().to_json()).unwrap(),
        "options": {"fold_negations": true},
    });
    let (status, resp) = post_json("/v1/apply", &body).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(resp["mask"].as_array().unwrap(), &gw_mask());
    assert_eq!(resp["formula"], r#"AND(LEFT(A2,2)="GW", NOT(OR(RIGHT(A2,2)="-F", RIGHT(A2,2)="-T")))"#);
}

#[tokio::test]
async fn apply_rejects_mismatched_and_malformed_rules() {
    let rule = json!({"format": "f", "disjuncts": [[{"predicate": {"kind": "less", "type": "numeric", "args": ["5"]}, "negated": false}]]});
    let body = json!({"table": work_orders_csv(), "column": "WO", "rule": rule});
    let (status, resp) = post_json("/v1/apply", &body).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(resp["error"]["code"], "TypeMismatch");

    let body = json!({"table": work_orders_csv(), "column": "WO", "rule": {"format": "f"}});
    let (status, resp) = post_json("/v1/apply", &body).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(resp["error"]["path"], "/rule/disjuncts");
}

#[tokio::test]
async fn cors_allows_browser_origins() {
    let req = Request::get("/v1/health")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = tower::ServiceExt::oneshot(app(), req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
