//! HTTP/JSON play service.
//!
//! ```text
//! POST /api/v1/sessions                    create a session
//! GET  /api/v1/sessions/{id}               public session state
//! POST /api/v1/sessions/{id}/measure       {"role": "juan"|"silvia", "time": t}
//! GET  /api/v1/games/{g}/heatmap?resolution=R
//! ```
//!
//! Everything else falls through to the static directory, if one is given.

mod error;
pub mod session;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::Value;
use tower_http::services::ServeDir;
use zenoflip_core::export::heatmap_json;
use zenoflip_core::strategy::heatmap;
use zenoflip_core::Game;

pub use error::PlayError;
pub use session::{AiStrategy, Role, RoundUpdate, Session, SessionConfig, SessionView};
pub use store::SessionStore;

pub const MAX_HEATMAP_RESOLUTION: usize = 1001;
const DEFAULT_HEATMAP_RESOLUTION: usize = 101;

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub static_dir: Option<PathBuf>,
    pub journal_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct MeasureRequest {
    role: Role,
    time: f64,
}

#[derive(Debug, Deserialize)]
struct HeatmapQuery {
    resolution: Option<usize>,
}

type AppState = Arc<SessionStore>;

async fn create_session(
    State(store): State<AppState>,
    body: Result<Json<SessionConfig>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<SessionView>, PlayError> {
    let Json(config) = body.map_err(|e| PlayError::BadRequest(e.body_text()))?;
    store.create(config).map(Json)
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, PlayError> {
    store.view(&id).map(Json)
}

async fn measure(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<MeasureRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<RoundUpdate>, PlayError> {
    let Json(req) = body.map_err(|e| PlayError::BadRequest(e.body_text()))?;
    store.submit(&id, req.role, req.time).map(Json)
}

async fn game_heatmap(Path(game): Path<u8>, Query(q): Query<HeatmapQuery>) -> Result<Json<Value>, PlayError> {
    let spec = match game {
        1 => Game::two_measure(),
        2 => Game::three_measure(),
        g => return Err(PlayError::NotFound(format!("no game {g}"))),
    };
    let requested = q.resolution.unwrap_or(DEFAULT_HEATMAP_RESOLUTION);
    let resolution = requested.min(MAX_HEATMAP_RESOLUTION);
    let grid = tokio::task::spawn_blocking(move || heatmap(&spec, resolution))
        .await
        .map_err(|e| PlayError::Conflict(e.to_string()))?
        .map_err(|e| PlayError::BadRequest(e.to_string()))?;
    let mut body = heatmap_json(&grid);
    if requested > resolution {
        body["clamped_from"] = requested.into();
    }
    Ok(Json(body))
}

pub fn router(store: Arc<SessionStore>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/v1/sessions", post(create_session))
        .route("/api/v1/sessions/{id}", get(get_session))
        .route("/api/v1/sessions/{id}/measure", post(measure))
        .route("/api/v1/games/{game}/heatmap", get(game_heatmap))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let store = Arc::new(SessionStore::new(config.journal_dir));
    let app = router(store, config.static_dir);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app).await
}
