//! JSON API for interactive games, plus static files for the browser client.
//!
//! Every game sits behind its own mutex, so requests touching one game are
//! serialised while different games proceed independently.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use kgame_core::strategy::StrategySpec;
use kgame_core::{GameConfig, Player};

use crate::session::Session;

#[derive(Default)]
pub struct AppState {
    games: Mutex<HashMap<u64, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

pub type Shared = Arc<AppState>;

#[derive(Debug, Deserialize)]
pub struct NewGame {
    pub k: usize,
    pub n: usize,
    pub engine: String,
    pub ell: Option<usize>,
    #[serde(default)]
    pub human_first: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
pub struct MoveRequest {
    pub u: usize,
    pub v: usize,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

impl AppState {
    fn game(&self, id: u64) -> Option<Arc<Mutex<Session>>> {
        self.games.lock().expect("games lock").get(&id).cloned()
    }
}

async fn create_game(State(app): State<Shared>, Json(req): Json<NewGame>) -> Response {
    let engine = match req.ell {
        Some(ell) => StrategySpec::parse_with_ell(&req.engine, ell),
        None => req.engine.parse(),
    };
    let engine = match engine {
        Ok(e) => e,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let config = GameConfig::new(req.n, req.k, Player::A, req.seed);
    // Engine construction and its first move may take a while on big boards.
    let made = tokio::task::spawn_blocking(move || {
        Session::new(config, engine, req.human_first).map(|mut s| {
            let snap = s.snapshot();
            (s, snap)
        })
    })
    .await;
    match made {
        Ok(Ok((session, snapshot))) => {
            let id = app.next_id.fetch_add(1, Ordering::Relaxed) + 1;
            app.games
                .lock()
                .expect("games lock")
                .insert(id, Arc::new(Mutex::new(session)));
            (StatusCode::CREATED, Json(json!({ "game_id": id, "snapshot": snapshot }))).into_response()
        }
        Ok(Err(e)) => error(StatusCode::BAD_REQUEST, e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn get_game(State(app): State<Shared>, Path(id): Path<u64>) -> Response {
    let Some(game) = app.game(id) else {
        return error(StatusCode::NOT_FOUND, format!("no game {id}"));
    };
    let snap = tokio::task::spawn_blocking(move || game.lock().expect("game lock").snapshot()).await;
    match snap {
        Ok(s) => Json(s).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn post_move(State(app): State<Shared>, Path(id): Path<u64>, Json(req): Json<MoveRequest>) -> Response {
    let Some(game) = app.game(id) else {
        return error(StatusCode::NOT_FOUND, format!("no game {id}"));
    };
    let result = tokio::task::spawn_blocking(move || {
        let mut s = game.lock().expect("game lock");
        s.human_move(req.u, req.v).map(|out| (out, s.snapshot()))
    })
    .await;
    match result {
        Ok(Ok((out, snapshot))) => {
            let mut body = serde_json::to_value(out).expect("outcome serialises");
            body["snapshot"] = serde_json::to_value(snapshot).expect("snapshot serialises");
            Json(body).into_response()
        }
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn delete_game(State(app): State<Shared>, Path(id): Path<u64>) -> Response {
    match app.games.lock().expect("games lock").remove(&id) {
        Some(_) => StatusCode::NO_CONTENT.into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no game {id}")),
    }
}

async fn health() -> Json<Value> {
    Json(json!({ "ok": true }))
}

/// API routes, with `static_dir` (if any) served for all other paths.
pub fn router(static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/games", post(create_game))
        .route("/api/games/{id}", get(get_game).delete(delete_game))
        .route("/api/games/{id}/moves", post(post_move))
        .with_state(Shared::default());
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    }
}

pub async fn serve(addr: std::net::SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(static_dir)).await
}
