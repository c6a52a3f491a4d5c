//! Stateless JSON HTTP service.
//!
//! `POST /v1/suggest`, `POST /v1/apply`, `GET /v1/health`. Request bodies
//! are decoded by hand instead of through `axum::Json` so schema errors can
//! point at the offending field.

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use cfsynth_core::{apply, Engine, Error};
use serde::Serialize;
use tower_http::cors::CorsLayer;

use crate::input::{ApplyBody, SuggestBody};

pub const DEFAULT_BODY_LIMIT: usize = 5 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: IpAddr,
    pub port: u16,
    pub weights: Option<PathBuf>,
    pub body_limit: usize,
    pub log: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            weights: None,
            body_limit: DEFAULT_BODY_LIMIT,
            log: "info".into(),
        }
    }
}

impl ServiceConfig {
    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}

pub fn router(engine: Arc<Engine>, body_limit: usize) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/suggest", post(suggest))
        .route("/v1/apply", post(apply_rule))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(CorsLayer::permissive())
        .with_state(engine)
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: ErrorDetail,
}

#[derive(Debug, Serialize)]
struct ErrorDetail {
    code: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

/// Error response with a JSON body.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    detail: ErrorDetail,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            detail: ErrorDetail {
                code,
                message: message.into(),
                path: None,
            },
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Schema { .. }
            | Error::MalformedInput(_)
            | Error::EmptyTable
            | Error::InvalidAnnotation(_)
            | Error::NoExamples
            | Error::Config(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let path = match &e {
            Error::Schema { path, .. } => Some(path.clone()),
            _ => None,
        };
        let message = match &e {
            Error::Schema { message, .. } => message.clone(),
            other => other.to_string(),
        };
        ApiError {
            status,
            detail: ErrorDetail {
                code: e.code(),
                message,
                path,
            },
        }
    }
}

impl From<BytesRejection> for ApiError {
    fn from(r: BytesRejection) -> Self {
        let code = if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
            "PayloadTooLarge"
        } else {
            "BadBody"
        };
        ApiError::new(r.status(), code, r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, &ErrorBody { error: self.detail })
    }
}

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    let body = serde_json::to_vec(value).expect("response serializes");
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn json_body(headers: &HeaderMap, body: Result<Bytes, BytesRejection>) -> Result<String, ApiError> {
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(';').next().is_some_and(|m| m.trim().eq_ignore_ascii_case("application/json")));
    if !is_json {
        return Err(ApiError::new(
            StatusCode::UNSUPPORTED_MEDIA_TYPE,
            "UnsupportedMediaType",
            "expected content-type application/json",
        ));
    }
    String::from_utf8(body?.to_vec())
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "MalformedInput", "body is not UTF-8"))
}

async fn health() -> Response {
    json_response(StatusCode::OK, &serde_json::json!({ "status": "ok" }))
}

async fn suggest(
    State(engine): State<Arc<Engine>>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let text = json_body(&headers, body)?;
    let req: SuggestBody = cfsynth_core::json::from_str(&text)?;
    let resp = tokio::task::spawn_blocking(move || engine.suggest(&req.prepare()?))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?;
    match resp {
        Ok(r) => {
            tracing::info!(pool = r.diagnostics.predicate_pool_size, ms = r.diagnostics.elapsed_ms, "suggest");
            Ok(json_response(StatusCode::OK, &r))
        }
        Err(e) => {
            tracing::info!(code = e.code(), "suggest failed");
            Err(e.into())
        }
    }
}

async fn apply_rule(headers: HeaderMap, body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let text = json_body(&headers, body)?;
    let req: ApplyBody = cfsynth_core::json::from_str(&text)?;
    let (column, formula) = req.prepare()?;
    let result = apply(&req.rule, &column, formula)?;
    Ok(json_response(StatusCode::OK, &result))
}

/// Binds and serves until interrupted.
pub async fn serve(config: ServiceConfig, engine: Engine) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.addr()).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(engine), config.body_limit))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
