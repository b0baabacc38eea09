//! HTTP advisor for live games.
//!
//! Sessions live in memory. Each one sits behind its own lock, so requests
//! for one session are serialized while different sessions run in parallel.
//! Both `/api/games` and `/api/grids` expose the same operations.

mod error;
mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use blindseq_core::grid::{GridState, Sampling, GRID_MAX_SIDE};
use blindseq_core::{tables_for, Execution, GameState, StrategyKind, DEFAULT_N_MAX};
use serde::Deserialize;
use tokio::sync::Mutex;
use tower_http::cors::CorsLayer;
use uuid::Uuid;

pub use error::ApiError;
pub use session::{advise_board, Advice, Board, DrawResponse, PendingDraw, Placement, Session, SessionDocument, Status, Tables, Variant};

pub const MAX_LIST_LEN: usize = DEFAULT_N_MAX;
pub const MAX_GRID_SIDE: usize = 8;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub ttl: Duration,
    pub max_sessions: usize,
    pub grid_samples: u64,
    pub grid_seed: u64,
    pub workers: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            ttl: Duration::from_secs(24 * 60 * 60),
            max_sessions: 10_000,
            grid_samples: 100_000,
            grid_seed: 0x5eed,
            workers: blindseq_core::par::default_workers(),
        }
    }
}

type SessionHandle = Arc<Mutex<Session>>;

pub struct AppState {
    config: ServiceConfig,
    sessions: std::sync::Mutex<HashMap<Uuid, SessionHandle>>,
    rt: Arc<Tables>,
    es: Arc<Tables>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        let table = |kind| {
            let (strategy, probs) = tables_for(kind, MAX_LIST_LEN).expect("default tables are valid");
            Arc::new(Tables { strategy, probs })
        };
        AppState {
            config,
            sessions: Default::default(),
            rt: table(StrategyKind::RiskTolerant),
            es: table(StrategyKind::EqualSpacing),
        }
    }

    fn tables(&self, kind: StrategyKind) -> Arc<Tables> {
        match kind {
            StrategyKind::EqualSpacing => self.es.clone(),
            _ => self.rt.clone(),
        }
    }

    fn sampling(&self) -> Sampling {
        Sampling::new(self.config.grid_samples, self.config.grid_seed)
            .with_exec(Execution::from_workers(self.config.workers))
    }

    fn insert(&self, session: Session) -> Result<SessionHandle, ApiError> {
        let mut map = self.sessions.lock().expect("session map poisoned");
        let ttl = self.config.ttl;
        map.retain(|_, s| s.try_lock().map_or(true, |s| s.last_access.elapsed() < ttl));
        if map.len() >= self.config.max_sessions {
            return Err(ApiError::Unavailable("session limit reached".into()));
        }
        let id = session.id;
        let handle = Arc::new(Mutex::new(session));
        map.insert(id, handle.clone());
        Ok(handle)
    }

    fn lookup(&self, id: &str) -> Result<SessionHandle, ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::NotFound(format!("no session '{id}'")))?;
        self.sessions
            .lock()
            .expect("session map poisoned")
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session '{id}'")))
    }

    // Locks a live session, dropping it if it has expired.
    async fn open(&self, id: &str) -> Result<tokio::sync::OwnedMutexGuard<Session>, ApiError> {
        let handle = self.lookup(id)?;
        let mut guard = handle.lock_owned().await;
        if guard.last_access.elapsed() >= self.config.ttl {
            self.sessions.lock().expect("session map poisoned").remove(&guard.id);
            return Err(ApiError::NotFound(format!("session '{id}' expired")));
        }
        guard.last_access = Instant::now();
        Ok(guard)
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map poisoned").len()
    }
}

#[derive(Debug, Deserialize)]
struct CreateRequest {
    variant: Option<Variant>,
    n: Option<usize>,
    m: Option<usize>,
    strategy: Option<String>,
}

#[derive(Debug, Deserialize)]
struct DrawRequest {
    value: i64,
}

#[derive(Debug, Deserialize, Default)]
struct DrawQuery {
    #[serde(default)]
    autoplace: bool,
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("malformed body: {e}")))
}

fn create(state: &AppState, req: CreateRequest, forced: Option<Variant>) -> Result<SessionDocument, ApiError> {
    let variant = forced.or(req.variant).unwrap_or(if req.m.is_some() { Variant::Grid } else { Variant::List });
    let session = match variant {
        Variant::List => {
            let n = req.n.ok_or_else(|| ApiError::BadRequest("list games need n".into()))?;
            if !(1..=MAX_LIST_LEN).contains(&n) {
                return Err(ApiError::BadRequest(format!("n must be in 1..={MAX_LIST_LEN}")));
            }
            let kind = match req.strategy.as_deref() {
                None => StrategyKind::RiskTolerant,
                Some(s) => s.parse()?,
            };
            if kind == StrategyKind::Custom {
                return Err(ApiError::BadRequest("strategy must be rt or es".into()));
            }
            let board = Board::List {
                game: GameState::new(n)?,
                tables: state.tables(kind),
            };
            Session::new(board, Some(kind))
        }
        Variant::Grid => {
            let m = req.m.ok_or_else(|| ApiError::BadRequest("grid games need m".into()))?;
            if !(1..=MAX_GRID_SIDE.min(GRID_MAX_SIDE)).contains(&m) {
                return Err(ApiError::BadRequest(format!("m must be in 1..={MAX_GRID_SIDE}")));
            }
            Session::new(Board::Grid { grid: GridState::new(m)? }, None)
        }
    };
    let doc = session.document();
    state.insert(session)?;
    Ok(doc)
}

async fn create_list(State(state): State<Arc<AppState>>, body: axum::body::Bytes) -> Result<impl IntoResponse, ApiError> {
    let doc = create(&state, parse_json(&body)?, None)?;
    Ok((StatusCode::CREATED, Json(doc)))
}

async fn create_grid(State(state): State<Arc<AppState>>, body: axum::body::Bytes) -> Result<impl IntoResponse, ApiError> {
    let doc = create(&state, parse_json(&body)?, Some(Variant::Grid))?;
    Ok((StatusCode::CREATED, Json(doc)))
}

async fn submit_draw(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<DrawQuery>,
    body: axum::body::Bytes,
) -> Result<Json<DrawResponse>, ApiError> {
    let req: DrawRequest = parse_json(&body)?;
    let mut session = state.open(&id).await?;
    let x = session.check_draw(req.value)?;
    let advice = match &session.board {
        Board::List { .. } => advise_board(&session.board, x, state.sampling())?,
        Board::Grid { .. } => {
            // Monte Carlo scoring is CPU-bound.
            let (board, sampling) = (session.board.clone(), state.sampling());
            tokio::task::spawn_blocking(move || advise_board(&board, x, sampling))
                .await
                .map_err(|e| ApiError::Internal(e.to_string()))??
        }
    };
    Ok(Json(session.accept_draw(req.value, x, advice, query.autoplace)?))
}

async fn commit_placement(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> Result<Json<SessionDocument>, ApiError> {
    let placement: Placement = parse_json(&body)?;
    let mut session = state.open(&id).await?;
    session.commit(placement)?;
    Ok(Json(session.document()))
}

async fn get_state(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionDocument>, ApiError> {
    let session = state.open(&id).await?;
    Ok(Json(session.document()))
}

async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let handle = state.lookup(&id)?;
    let id = handle.lock().await.id;
    state.sessions.lock().expect("session map poisoned").remove(&id);
    Ok(StatusCode::NO_CONTENT)
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(state: Arc<AppState>) -> Router {
    let per_session = || {
        Router::new()
            .route("/{id}", get(get_state).delete(delete_session))
            .route("/{id}/draws", post(submit_draw))
            .route("/{id}/placements", post(commit_placement))
    };
    Router::new()
        .route("/health", get(health))
        .route("/api/games", post(create_list))
        .route("/api/grids", post(create_grid))
        .nest("/api/games", per_session())
        .nest("/api/grids", per_session())
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves on an already bound listener until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    let app = router(Arc::new(AppState::new(config)));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub async fn bind(addr: SocketAddr) -> std::io::Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(addr).await
}
