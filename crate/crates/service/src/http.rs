use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use uuid::Uuid;

use crate::store::{
    CreateGame, MoveOutcome, MoveRequest, Reason, ServiceError, SessionStore, SessionSummary, SessionView,
};

/// Error body. `reason` is absent only for malformed requests.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub reason: Option<Reason>,
    pub message: String,
}

#[derive(Debug)]
pub enum ApiError {
    Service(ServiceError),
    BadRequest(String),
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError::Service(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, reason, message) = match self {
            ApiError::Service(e) => {
                let status = match e.reason() {
                    Reason::NotFound => StatusCode::NOT_FOUND,
                    Reason::GameOver => StatusCode::CONFLICT,
                    Reason::TooFar | Reason::OutOfQuadrant | Reason::NonDominatingStart => {
                        StatusCode::UNPROCESSABLE_ENTITY
                    }
                };
                (status, Some(e.reason()), e.to_string())
            }
            ApiError::BadRequest(message) => (StatusCode::BAD_REQUEST, None, message),
        };
        (status, Json(ErrorBody { reason, message })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_id(raw: &str) -> ApiResult<Uuid> {
    // An id that cannot be a session id names no session.
    raw.parse()
        .map_err(|_| ApiError::Service(ServiceError::NotFound(Uuid::nil())))
}

async fn create(
    State(store): State<Arc<SessionStore>>,
    body: Result<Json<CreateGame>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionSummary>)> {
    let Json(req) = body?;
    Ok((StatusCode::CREATED, Json(store.create(&req)?)))
}

async fn man_move(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<MoveRequest>, JsonRejection>,
) -> ApiResult<Json<MoveOutcome>> {
    let Json(req) = body?;
    Ok(Json(store.man_move(parse_id(&id)?, req.to)?))
}

async fn preview(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<MoveRequest>, JsonRejection>,
) -> ApiResult<Json<MoveOutcome>> {
    let Json(req) = body?;
    Ok(Json(store.preview(parse_id(&id)?, req.to)?))
}

async fn fetch(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    Ok(Json(store.view(parse_id(&id)?)?))
}

async fn delete(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    store.delete(parse_id(&id)?)?;
    Ok(StatusCode::NO_CONTENT)
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/games", post(create))
        .route("/games/{id}", get(fetch).delete(delete))
        .route("/games/{id}/man-move", post(man_move))
        .route("/games/{id}/preview", post(preview))
        .with_state(store)
}
