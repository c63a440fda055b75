//! HTTP/JSON API over the engine.
//!
//! The loaded config is shared read-only. A request overlay is applied to a
//! private copy, so no request sees another's overlay. There is no
//! authentication: bind to localhost only.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use beanledger_core::scenario::{
    breakeven, builtin_cases, optimize_allocation, sweep, Breakeven, CaseSpec, OptimizationConstraint, Optimum,
    ScenarioError, SweepSeries, SweepSpec,
};
use beanledger_core::{AllocationPlan, ConfigError, ModelConfig, ModelError, ScenarioResult};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};
use tokio::net::TcpListener;

use crate::inputs::parse_axis;

type Shared = Arc<ModelConfig>;

pub fn router(config: ModelConfig) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/config", get(config_handler))
        .route("/cases", get(cases))
        .route("/evaluate", post(evaluate))
        .route("/sweep", post(sweep_handler))
        .route("/breakeven", post(breakeven_handler))
        .route("/optimize", post(optimize))
        .fallback(not_found)
        .with_state(Arc::new(config))
}

pub async fn serve(listener: TcpListener, config: ModelConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config)).await
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: json!({ "error": message.into() }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<ScenarioError> for ApiError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Model(m) => m.into(),
            ScenarioError::InfeasibleBreakeven(m) | ScenarioError::InfeasibleConstraint(m) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({ "status": "infeasible", "error": m }),
            },
            other => ApiError::bad_request(other.to_string()),
        }
    }
}

/// A JSON object body whose fields are taken one at a time.
struct Body(Map<String, Value>);

impl Body {
    fn parse(bytes: &[u8]) -> Result<Self, ApiError> {
        if bytes.iter().all(u8::is_ascii_whitespace) {
            return Ok(Body(Map::new()));
        }
        match serde_json::from_slice(bytes) {
            Ok(Value::Object(map)) => Ok(Body(map)),
            Ok(_) => Err(ApiError::bad_request("request body must be a JSON object")),
            Err(e) => Err(ApiError::bad_request(format!("invalid JSON body: {e}"))),
        }
    }

    /// Active config for this request: the shared one with `overlay` applied.
    fn config(&mut self, shared: &ModelConfig) -> Result<ModelConfig, ApiError> {
        match self.0.remove("overlay") {
            None | Some(Value::Null) => Ok(shared.clone()),
            Some(patch) => Ok(shared.overlay(&patch)?),
        }
    }

    fn field<T: DeserializeOwned>(&mut self, key: &str) -> Result<Option<T>, ApiError> {
        self.0.remove(key).map(|v| decode(key, v)).transpose()
    }

    /// The main payload: under `key`, or else the remaining top-level fields.
    fn payload<T: DeserializeOwned>(self, key: &str) -> Result<T, ApiError> {
        let mut rest = self.0;
        match rest.remove(key) {
            Some(v) if rest.is_empty() => decode(key, v),
            Some(_) => {
                let extra: Vec<_> = rest.keys().map(String::as_str).collect();
                Err(ApiError::bad_request(format!("unknown field(s): {}", extra.join(", "))))
            }
            None => decode(key, Value::Object(rest)),
        }
    }
}

fn decode<T: DeserializeOwned>(key: &str, value: Value) -> Result<T, ApiError> {
    serde_json::from_value(value).map_err(|e| ApiError::bad_request(format!("invalid {key}: {e}")))
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn config_handler(State(config): State<Shared>) -> Json<ModelConfig> {
    Json((*config).clone())
}

async fn cases() -> Json<Vec<CaseSpec>> {
    Json(builtin_cases())
}

/// Body: `{"plan": AllocationPlan, "overlay"?: {...}}`, or the plan fields at top level.
async fn evaluate(State(shared): State<Shared>, bytes: Bytes) -> Result<Json<ScenarioResult>, ApiError> {
    let mut body = Body::parse(&bytes)?;
    let config = body.config(&shared)?;
    let plan: AllocationPlan = body.payload("plan")?;
    Ok(Json(config.evaluate(&plan)?))
}

/// Body: `{"spec": SweepSpec, "plan"?: AllocationPlan, "overlay"?: {...}}`.
async fn sweep_handler(State(shared): State<Shared>, bytes: Bytes) -> Result<Json<SweepSeries>, ApiError> {
    let mut body = Body::parse(&bytes)?;
    let config = body.config(&shared)?;
    let plan = body.field("plan")?.unwrap_or_else(AllocationPlan::zero);
    let spec: SweepSpec = body.payload("spec")?;
    Ok(Json(sweep(&spec, &config, &plan)?))
}

/// Body: `{"axis": "price.gcb.1" | "dehulling" | ..., "plan": AllocationPlan, "overlay"?: {...}}`.
/// An infeasible breakeven answers 422 with its reason.
async fn breakeven_handler(State(shared): State<Shared>, bytes: Bytes) -> Result<Response, ApiError> {
    let mut body = Body::parse(&bytes)?;
    let config = body.config(&shared)?;
    let plan = body.field("plan")?.unwrap_or_else(AllocationPlan::zero);
    let axis: String = body
        .field("axis")?
        .ok_or_else(|| ApiError::bad_request("missing field `axis`"))?;
    if let Some(extra) = body.0.keys().next() {
        return Err(ApiError::bad_request(format!("unknown field(s): {extra}")));
    }
    let target = parse_axis(&axis)?;
    let found = breakeven(target, &config, &plan)?;
    Ok(match found {
        Breakeven::Infeasible { reason, .. } => {
            let mut body = serde_json::to_value(&found).expect("breakeven serializes");
            body["error"] = json!(reason.to_string());
            (StatusCode::UNPROCESSABLE_ENTITY, Json(body)).into_response()
        }
        Breakeven::Value { .. } => Json(found).into_response(),
    })
}

/// Body: `{"constraint"?: OptimizationConstraint, "overlay"?: {...}}`, or the
/// constraint fields at top level.
async fn optimize(State(shared): State<Shared>, bytes: Bytes) -> Result<Json<Optimum>, ApiError> {
    let mut body = Body::parse(&bytes)?;
    let config = body.config(&shared)?;
    let constraint = if body.0.is_empty() {
        OptimizationConstraint::None
    } else {
        body.payload("constraint")?
    };
    Ok(Json(optimize_allocation(&constraint, &config)?))
}

async fn not_found(uri: Uri) -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        body: json!({ "error": format!("no route for {}", uri.path()) }),
    }
}
