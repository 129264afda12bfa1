use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use ucme_core::archive::ArchiveConfig;
use ucme_core::engine::{DasMethod, SelectionWindow, Session, SessionConfig};
use ucme_core::floorplan::{DesignSpec, DomainConfig, SpecError};
use ucme_core::metrics::{AlternativeLog, RunLog};
use ucme_core::FloorplanDomain;
use uuid::Uuid;

use crate::error::ApiError;
use crate::state::{lock, Alternative, Registry, Slot, Status};

pub type AppState = Arc<Registry>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_status))
        .route("/sessions/{id}/alternatives", get(alternatives))
        .route("/sessions/{id}/selection", post(submit_selection))
        .route("/sessions/{id}/archive", get(archive_view))
        .route("/sessions/{id}/history", get(history))
        .route("/sessions/{id}/export", get(export))
        .with_state(state)
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct CreateRequest {
    /// Design spec document; the bundled apartment when absent.
    pub spec: Option<Value>,
    pub config: SessionConfig,
    pub domain: DomainConfig,
    pub das: Option<DasMethod>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatusResponse {
    pub id: Uuid,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub das: DasMethod,
    pub selections: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<SelectionWindow>,
    pub evaluations: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AlternativesResponse {
    pub das: DasMethod,
    pub alternatives: Vec<Alternative>,
}

#[derive(Debug, Deserialize)]
pub struct AlternativesQuery {
    pub das: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectionRequest {
    pub alt_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    #[default]
    Feasible,
    Infeasible,
}

#[derive(Debug, Deserialize)]
pub struct ArchiveQuery {
    #[serde(default)]
    pub which: Which,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ArchiveResponse {
    pub which: Which,
    pub resolution: usize,
    /// `quality[row][col]`; row 0 holds the lowest values of the second behavior.
    pub quality: Vec<Vec<Option<f64>>>,
    pub occupied: usize,
    pub window: SelectionWindow,
    pub bc_ranges: [[f64; 2]; 2],
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub index: usize,
    pub das: DasMethod,
    pub chosen: AlternativeLog,
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

fn spec_error(e: SpecError) -> ApiError {
    ApiError::Invalid { code: "invalid_spec", message: e.to_string(), field: e.field().map(str::to_string) }
}

async fn create_session(
    State(registry): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<StatusResponse>), ApiError> {
    let request = json_body(body)?;
    let spec = match request.spec {
        Some(doc) => DesignSpec::from_value(doc).map_err(spec_error)?,
        None => DesignSpec::apartment(),
    };
    request
        .config
        .validate()
        .map_err(|e| ApiError::Invalid { code: "invalid_config", message: e.to_string(), field: None })?;
    let das = request.das.unwrap_or(DasMethod::Corners);
    let domain = Arc::new(FloorplanDomain::new(spec, request.domain));
    let config = request.config;
    let (id, slot) = registry.insert(Slot::new(config.clone(), das));
    let worker = Arc::clone(&slot);
    let task = tokio::task::spawn_blocking(move || {
        let result = Session::init(domain, config);
        lock(&worker).settle(result);
    });
    watch(task, Arc::clone(&slot));
    let response = status_of(id, &lock(&slot));
    Ok((StatusCode::CREATED, Json(response)))
}

/// Fails the session if its background task panics.
fn watch(task: tokio::task::JoinHandle<()>, slot: Arc<std::sync::Mutex<Slot>>) {
    tokio::spawn(async move {
        if let Err(e) = task.await {
            lock(&slot).abort(format!("evolution task stopped: {e}"));
        }
    });
}

fn status_of(id: Uuid, slot: &Slot) -> StatusResponse {
    StatusResponse {
        id,
        status: slot.status,
        reason: slot.reason.clone(),
        das: slot.das,
        selections: slot.selections.len(),
        window: slot.view.as_ref().map(|v| v.window),
        evaluations: slot.view.as_ref().map_or(0, |v| v.evaluations),
    }
}

async fn session_status(
    State(registry): State<AppState>,
    Path(id): Path<Uuid>,
) -> Result<Json<StatusResponse>, ApiError> {
    let slot = registry.get(id)?;
    let response = status_of(id, &lock(&slot));
    Ok(Json(response))
}

async fn alternatives(
    State(registry): State<AppState>,
    Path(id): Path<Uuid>,
    Query(query): Query<AlternativesQuery>,
) -> Result<Json<AlternativesResponse>, ApiError> {
    let das = query
        .das
        .map(|s| s.parse::<DasMethod>().map_err(|e| ApiError::BadRequest(e.to_string())))
        .transpose()?;
    let slot = registry.get(id)?;
    let mut slot = lock(&slot);
    let alternatives = slot.alternatives(das)?;
    Ok(Json(AlternativesResponse { das: slot.das, alternatives }))
}

async fn submit_selection(
    State(registry): State<AppState>,
    Path(id): Path<Uuid>,
    body: Result<Json<SelectionRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<StatusResponse>), ApiError> {
    let request = json_body(body)?;
    let slot = registry.get(id)?;
    let mut session = lock(&slot).begin_selection(request.alt_id)?;
    let worker = Arc::clone(&slot);
    let task = tokio::task::spawn_blocking(move || {
        let result = session.apply_selection(request.alt_id).map(|_| session);
        lock(&worker).settle(result);
    });
    watch(task, Arc::clone(&slot));
    let response = status_of(id, &lock(&slot));
    Ok((StatusCode::ACCEPTED, Json(response)))
}

async fn archive_view(
    State(registry): State<AppState>,
    Path(id): Path<Uuid>,
    Query(query): Query<ArchiveQuery>,
) -> Result<Json<ArchiveResponse>, ApiError> {
    let slot = registry.get(id)?;
    let slot = lock(&slot);
    let view = slot.view.as_ref().ok_or_else(|| ApiError::Conflict("warm-up has not finished".into()))?;
    let dump = match query.which {
        Which::Feasible => &view.feasible,
        Which::Infeasible => &view.infeasible,
    };
    let ArchiveConfig { bc1_range, bc2_range, .. } = slot.config.archive;
    Ok(Json(ArchiveResponse {
        which: query.which,
        resolution: dump.resolution,
        quality: dump.matrix(),
        occupied: dump.cells.len(),
        window: view.window,
        bc_ranges: [bc1_range, bc2_range],
    }))
}

async fn history(
    State(registry): State<AppState>,
    Path(id): Path<Uuid>,
) -> Result<Json<Vec<HistoryEntry>>, ApiError> {
    let slot = registry.get(id)?;
    let slot = lock(&slot);
    Ok(Json(
        slot.selections
            .iter()
            .map(|s| HistoryEntry { index: s.index, das: s.method, chosen: s.chosen().clone() })
            .collect(),
    ))
}

async fn export(State(registry): State<AppState>, Path(id): Path<Uuid>) -> Result<Json<RunLog>, ApiError> {
    let slot = registry.get(id)?;
    let log = lock(&slot).export()?;
    Ok(Json(log))
}
