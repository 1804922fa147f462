//! HTTP+JSON session service.
//!
//! Sessions live in memory. Each one sits behind its own mutex, so requests
//! to one session are handled one at a time while different sessions proceed
//! independently.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use sqd_core::session::{Session, SessionError};

use crate::format::DpiDocument;
use crate::options::QueryOptions;
use crate::view::{self, HistoryView, ProposalView, SessionView};

#[derive(Default)]
pub struct AppState {
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl AppState {
    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let sessions = self.sessions.lock().expect("session table poisoned");
        sessions.get(id).cloned().ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub dpi: DpiDocument,
    #[serde(default)]
    pub config: QueryOptions,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub answer: bool,
    /// Sentences of the query being answered; rejected when it is not the
    /// pending one.
    #[serde(default)]
    pub query: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::Converged
            | SessionError::NoPendingQuery
            | SessionError::StaleQuery
            | SessionError::ContradictoryAnswer => StatusCode::CONFLICT,
            SessionError::LeadingCount(_) | SessionError::NoDiagnosis | SessionError::Measure(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn lock(s: &Mutex<Session>) -> std::sync::MutexGuard<'_, Session> {
    s.lock().unwrap_or_else(|e| e.into_inner())
}

async fn create(State(state): State<Arc<AppState>>, Json(req): Json<CreateRequest>) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let unprocessable = |e: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e);
    let dpi = req.dpi.to_dpi().map_err(|e| unprocessable(e.to_string()))?;
    let config = req.config.session_config().map_err(|e| unprocessable(e.to_string()))?;
    let session = Session::new(dpi, config)?;
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    let body = view::session(&id, &session);
    state.sessions.lock().expect("session table poisoned").insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn show(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionView> {
    let s = state.get(&id)?;
    let s = lock(&s);
    Ok(Json(view::session(&id, &s)))
}

async fn next_query(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<ProposalView> {
    let s = state.get(&id)?;
    let mut s = lock(&s);
    let qcm = s.config().qcm;
    s.next_query()?;
    let p = s.pending().expect("next_query leaves a pending query");
    Ok(Json(view::proposal(s.dpi(), &qcm, p)))
}

async fn answer(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<AnswerRequest>,
) -> ApiResult<SessionView> {
    let s = state.get(&id)?;
    let mut s = lock(&s);
    let pending = s.pending().ok_or(SessionError::NoPendingQuery)?;
    if let Some(sentences) = &req.query {
        let mut given = sentences.clone();
        given.sort();
        let mut expected: Vec<String> = pending.query.sentences.iter().map(ToString::to_string).collect();
        expected.sort();
        if given != expected {
            return Err(SessionError::StaleQuery.into());
        }
    }
    s.answer(req.answer)?;
    Ok(Json(view::session(&id, &s)))
}

async fn history(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Vec<HistoryView>> {
    let s = state.get(&id)?;
    let s = lock(&s);
    Ok(Json(view::history(&s)))
}

async fn remove(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let removed = state.sessions.lock().expect("session table poisoned").remove(&id);
    match removed {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}"))),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(show).delete(remove))
        .route("/api/sessions/{id}/next-query", post(next_query))
        .route("/api/sessions/{id}/answer", post(answer))
        .route("/api/sessions/{id}/history", get(history))
        .with_state(state)
}

/// Serves until interrupted.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(AppState::default())))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
