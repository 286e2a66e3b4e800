//! HTTP JSON API over a [`ReviewBoard`].

use std::collections::HashMap;
use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

use super::aggregate::Aggregation;
use super::board::ReviewBoard;
use super::rubric::RubricScore;
use crate::error::{Error, Result};

pub const REVIEWER_TOKENS_ENV: &str = "GUIDEBENCH_REVIEW_TOKENS";
pub const ADMIN_TOKEN_ENV: &str = "GUIDEBENCH_ADMIN_TOKEN";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Principal {
    Reviewer(String),
    Admin,
}

/// Bearer token → principal. No self-registration.
#[derive(Debug, Clone, Default)]
pub struct Tokens(HashMap<String, Principal>);

impl Tokens {
    /// `spec` is `reviewer=token` pairs separated by commas.
    pub fn parse(spec: &str, admin: Option<&str>) -> Result<Self> {
        let mut map = HashMap::new();
        for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (id, tok) = pair
                .split_once('=')
                .map(|(a, b)| (a.trim(), b.trim()))
                .filter(|(a, b)| !a.is_empty() && !b.is_empty())
                .ok_or_else(|| Error::Config(format!("reviewer token entry `{pair}` must be id=token")))?;
            if map.insert(tok.to_string(), Principal::Reviewer(id.to_string())).is_some() {
                return Err(Error::Config("two reviewers share a token".into()));
            }
        }
        if let Some(a) = admin.map(str::trim).filter(|a| !a.is_empty()) {
            if map.insert(a.to_string(), Principal::Admin).is_some() {
                return Err(Error::Config("admin token equals a reviewer token".into()));
            }
        }
        Ok(Self(map))
    }

    pub fn from_env() -> Result<Self> {
        let spec = std::env::var(REVIEWER_TOKENS_ENV)
            .map_err(|_| Error::Config(format!("{REVIEWER_TOKENS_ENV} is not set")))?;
        Self::parse(&spec, std::env::var(ADMIN_TOKEN_ENV).ok().as_deref())
    }

    pub fn reviewers(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .0
            .values()
            .filter_map(|p| match p {
                Principal::Reviewer(id) => Some(id.clone()),
                Principal::Admin => None,
            })
            .collect();
        ids.sort();
        ids
    }
}

struct ApiError(StatusCode, String);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Conflict(_) => StatusCode::CONFLICT,
            Error::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Precondition(_) | Error::Config(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Clone)]
struct AppState {
    board: Arc<ReviewBoard>,
    tokens: Arc<Tokens>,
}

impl AppState {
    fn principal(&self, headers: &HeaderMap) -> ApiResult<Principal> {
        headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .and_then(|t| self.tokens.0.get(t.trim()))
            .cloned()
            .ok_or_else(|| ApiError(StatusCode::UNAUTHORIZED, "missing or unknown bearer token".into()))
    }

    fn require_reviewer(&self, headers: &HeaderMap, reviewer_id: &str) -> ApiResult<()> {
        match self.principal(headers)? {
            Principal::Admin => Ok(()),
            Principal::Reviewer(id) if id == reviewer_id => Ok(()),
            Principal::Reviewer(_) => Err(forbidden()),
        }
    }

    fn require_admin(&self, headers: &HeaderMap) -> ApiResult<()> {
        match self.principal(headers)? {
            Principal::Admin => Ok(()),
            Principal::Reviewer(_) => Err(forbidden()),
        }
    }
}

fn forbidden() -> ApiError {
    ApiError(StatusCode::FORBIDDEN, "not permitted for this token".into())
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ready" }))
}

async fn queue(State(s): State<AppState>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    s.require_reviewer(&headers, &id)?;
    Ok(Json(s.board.queue(&id)).into_response())
}

async fn assignment(State(s): State<AppState>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    s.principal(&headers)?;
    let a = s.board.assignment(&id)?;
    s.require_reviewer(&headers, &a.reviewer_id)?;
    Ok(Json(s.board.masked(&id)?).into_response())
}

async fn score(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<String>,
    body: std::result::Result<Json<RubricScore>, JsonRejection>,
) -> ApiResult<Response> {
    let principal = s.principal(&headers)?;
    let a = s.board.assignment(&id)?;
    if principal != Principal::Reviewer(a.reviewer_id.clone()) {
        return Err(forbidden());
    }
    let Json(rubric) = body.map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.body_text()))?;
    let board = s.board.clone();
    let updated = tokio::task::spawn_blocking(move || board.record_score(&id, rubric))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(json!({ "assignment_id": updated.assignment_id, "state": updated.state })).into_response())
}

async fn decision(State(s): State<AppState>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    s.require_admin(&headers)?;
    Ok(match s.board.decision(&id)? {
        Aggregation::Ready(d) => Json(d).into_response(),
        pending @ Aggregation::NotReady { .. } => (StatusCode::ACCEPTED, Json(pending)).into_response(),
    })
}

async fn decisions(State(s): State<AppState>, headers: HeaderMap) -> ApiResult<Response> {
    s.require_admin(&headers)?;
    Ok(Json(s.board.decisions()?).into_response())
}

async fn progress(State(s): State<AppState>, headers: HeaderMap) -> ApiResult<Response> {
    s.principal(&headers)?;
    Ok(Json(s.board.progress()).into_response())
}

pub fn router(board: Arc<ReviewBoard>, tokens: Arc<Tokens>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/reviewers/{id}/queue", get(queue))
        .route("/api/assignments/{id}", get(assignment))
        .route("/api/assignments/{id}/score", post(score))
        .route("/api/items/{id}/decision", get(decision))
        .route("/api/decisions", get(decisions))
        .route("/api/progress", get(progress))
        .with_state(AppState { board, tokens })
}

/// Serve until `shutdown` resolves, then let in-flight requests finish.
pub async fn serve(
    listener: tokio::net::TcpListener,
    board: Arc<ReviewBoard>,
    tokens: Arc<Tokens>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<()> {
    axum::serve(listener, router(board, tokens))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| Error::Service(e.to_string()))
}
