//! JSON HTTP API over one loaded model.
//!
//! | method | path                       | body                          |
//! |--------|----------------------------|-------------------------------|
//! | GET    | `/api/v1/model`            | model metadata                |
//! | POST   | `/api/v1/predict`          | `{"covariates": {name: v}}`   |
//! | GET    | `/api/v1/neff-distribution`| development n_eff summary     |
//!
//! Errors are `{"error": {"code", "message", "field"}}` with status 400 for
//! malformed bodies, 422 for invalid covariates and 404 for unknown paths.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Request, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::Value;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use crate::design::CovariateKind;
use crate::error::Error;
use crate::glm::FittedModel;
use crate::pipeline::{predict_record, PredictionReport};
use crate::report::{inf_as_null, Histogram, Quantile, ThresholdCount};

#[derive(Clone, Debug, Default)]
pub struct ServeOptions {
    /// Directory of UI assets served for non-API paths.
    pub static_dir: Option<PathBuf>,
    /// Allowed cross-origin caller; `*` allows any.
    pub cors_origin: Option<String>,
    /// Log one line per request to stderr.
    pub log_requests: bool,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>, field: Option<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
                field,
            },
        }
    }

    fn malformed(message: impl Into<String>, field: Option<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "MalformedBody", message, field)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", message, None)
    }
}

static INTERNAL_ERRORS: AtomicU64 = AtomicU64::new(0);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let unprocessable = |code, field: &str| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                code,
                e.to_string(),
                Some(field.to_string()),
            )
        };
        match &e {
            Error::UnknownCovariate(n) => unprocessable("UnknownCovariate", n),
            Error::MissingCovariate(n) => unprocessable("MissingCovariate", n),
            Error::BinaryOutOfDomain { name, .. } => unprocessable("BinaryOutOfDomain", name),
            Error::NonFinite { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "NonFinite", e.to_string(), None)
            }
            _ => {
                let id = INTERNAL_ERRORS.fetch_add(1, Ordering::Relaxed);
                eprintln!("internal error #{id}: {e}");
                ApiError::new(
                    StatusCode::INTERNAL_SERVER_ERROR,
                    "Internal",
                    format!("internal error #{id}"),
                    None,
                )
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.body }))).into_response()
    }
}

#[derive(Debug, Serialize)]
pub struct CovariateDoc {
    pub name: String,
    pub kind: CovariateKind,
    pub center: f64,
    pub dev_min: Option<f64>,
    pub dev_max: Option<f64>,
    pub dev_mean: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ModelDoc {
    pub model_name: String,
    pub family: &'static str,
    pub covariates: Vec<CovariateDoc>,
    pub n_dev: usize,
    pub p: usize,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct DistributionDoc<'a> {
    pub quantiles: &'a [Quantile],
    pub histogram: &'a Histogram,
    #[serde(with = "inf_as_null")]
    pub harmonic_mean: f64,
    pub n_below: &'a [ThresholdCount],
    pub boundary_count: usize,
}

pub fn model_doc(model: &FittedModel) -> ModelDoc {
    let dev = model.development.as_ref();
    ModelDoc {
        model_name: model.name.clone(),
        family: model.family.name(),
        covariates: model
            .design
            .covariates()
            .iter()
            .map(|c| {
                let s = dev.and_then(|d| d.covariates.iter().find(|s| s.name == c.name));
                CovariateDoc {
                    name: c.name.clone(),
                    kind: c.kind,
                    center: c.center,
                    dev_min: s.map(|s| s.min),
                    dev_max: s.map(|s| s.max),
                    dev_mean: s.map(|s| s.mean),
                }
            })
            .collect(),
        n_dev: model.n_dev,
        p: model.p(),
        thresholds: dev.map(|d| d.thresholds.clone()).unwrap_or_default(),
    }
}

/// Parses `{"covariates": {...}}` into a numeric record.
pub fn parse_predict_body(body: &[u8]) -> Result<BTreeMap<String, f64>, ApiError> {
    let v: Value = serde_json::from_slice(body).map_err(|e| ApiError::malformed(format!("invalid JSON: {e}"), None))?;
    let covs = v
        .as_object()
        .and_then(|o| o.get("covariates"))
        .and_then(Value::as_object)
        .ok_or_else(|| ApiError::malformed("body must be an object with a `covariates` object", None))?;
    covs.iter()
        .map(|(k, v)| {
            v.as_f64()
                .map(|x| (k.clone(), x))
                .ok_or_else(|| ApiError::malformed(format!("`{k}` must be a number"), Some(k.clone())))
        })
        .collect()
}

pub fn predict_body(model: &FittedModel, body: &[u8]) -> Result<PredictionReport, ApiError> {
    let record = parse_predict_body(body)?;
    Ok(predict_record(model, &record)?)
}

async fn get_model(State(model): State<Arc<FittedModel>>) -> Json<ModelDoc> {
    Json(model_doc(&model))
}

async fn post_predict(State(model): State<Arc<FittedModel>>, body: Bytes) -> Result<Json<PredictionReport>, ApiError> {
    predict_body(&model, &body).map(Json)
}

async fn get_distribution(State(model): State<Arc<FittedModel>>) -> Result<Response, ApiError> {
    let dev = model
        .development
        .as_ref()
        .ok_or_else(|| ApiError::not_found("model has no development summary"))?;
    let d = &dev.neff;
    Ok(Json(DistributionDoc {
        quantiles: &d.quantiles,
        histogram: &d.histogram,
        harmonic_mean: d.harmonic_mean,
        n_below: &d.n_below,
        boundary_count: d.boundary_count,
    })
    .into_response())
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let start = Instant::now();
    let res = next.run(req).await;
    eprintln!(
        "{method} {path} {} {:.1}ms",
        res.status().as_u16(),
        start.elapsed().as_secs_f64() * 1e3
    );
    res
}

pub fn router(model: Arc<FittedModel>, opts: &ServeOptions) -> Router {
    let api = Router::new()
        .route("/api/v1/model", get(get_model))
        .route("/api/v1/predict", post(post_predict))
        .route("/api/v1/neff-distribution", get(get_distribution))
        .route("/api/{*rest}", axum::routing::any(not_found))
        .with_state(model);

    let mut app = match &opts.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    };
    if let Some(origin) = &opts.cors_origin {
        let allow = if origin == "*" {
            AllowOrigin::any()
        } else {
            match HeaderValue::from_str(origin) {
                Ok(v) => AllowOrigin::exact(v),
                Err(_) => AllowOrigin::list([]),
            }
        };
        app = app.layer(
            CorsLayer::new()
                .allow_origin(allow)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([axum::http::header::CONTENT_TYPE]),
        );
    }
    if opts.log_requests {
        app = app.layer(middleware::from_fn(log_request));
    }
    app
}
