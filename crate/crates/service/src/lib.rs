//! HTTP/JSON service for live human-vs-strategy games on hidden-rule stages, game
//! replays and tournament leaderboards. Responses carry boards, moves and outcomes,
//! never a stage's rules.

mod error;
mod session;
mod store;

use std::collections::HashMap;
use std::convert::Infallible;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::Deserialize;
use tokio::sync::{broadcast, Mutex};

use arena_core::api::{
    CreateSessionRequest, LeaderboardResponse, MoveResponse, ReplaySummary, SessionEvent, SessionStatus, SessionView,
    StageSummary, ValidMovesResponse,
};
use arena_core::board::Position;
use arena_core::clock::TimingMode;
use arena_core::log::to_structured;
use arena_core::stage::{builtin_catalog, CatalogEntry};
use arena_core::tournament::{run_analysis_phase, AnalysisOutcome, Budgets, Entrant, Seat, TournamentReport};

pub use error::ApiError;
pub use session::{MoveRejection, Session, HUMAN_NAME};
pub use store::Store;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Budgets for AI opponents: the game budget per session, and the analysis budget
    /// when the opponent is the meta-learner.
    pub budgets: Budgets,
    pub timing: TimingMode,
    /// Where finished session logs are written and CLI outputs are read from.
    pub data_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { budgets: Budgets::default(), timing: TimingMode::Wall, data_dir: None }
    }
}

/// Read side of a session, updated at every event so that polls never wait on a
/// running AI move.
struct Shared {
    view: SessionView,
    events: Vec<SessionEvent>,
}

struct SessionEntry {
    session: Arc<Mutex<Session>>,
    shared: RwLock<Shared>,
    tx: broadcast::Sender<SessionEvent>,
}

impl SessionEntry {
    fn publish(&self, view: SessionView, events: &[SessionEvent]) {
        let mut shared = self.shared.write().unwrap();
        shared.view = view;
        for e in events {
            shared.events.push(e.clone());
            let _ = self.tx.send(e.clone());
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    catalog: Arc<Vec<CatalogEntry>>,
    sessions: Arc<RwLock<HashMap<String, Arc<SessionEntry>>>>,
    store: Arc<Store>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        let catalog = builtin_catalog();
        AppState {
            store: Arc::new(Store::new(config.data_dir.clone())),
            config: Arc::new(config),
            catalog: Arc::new(catalog),
            sessions: Arc::default(),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    /// Registers a report so its leaderboard is served.
    pub fn add_report(&self, report: TournamentReport) {
        self.store.add_report(report);
    }

    fn entry(&self, id: &str) -> Result<Arc<SessionEntry>, ApiError> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::NotFound(format!("session {id}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/stages", get(list_stages))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/moves", post(post_move))
        .route("/api/sessions/{id}/valid-moves", get(get_valid_moves))
        .route("/api/sessions/{id}/log", get(get_log))
        .route("/api/sessions/{id}/events", get(session_events))
        .route("/api/replays", get(list_replays))
        .route("/api/replays/{id}", get(get_replay))
        .route("/api/leaderboards", get(list_leaderboards))
        .route("/api/leaderboards/{id}", get(get_leaderboard))
        .with_state(state)
}

/// Serves on `listener` until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

/// Binds `addr` (port 0 picks a free one) and serves in a background task.
pub async fn spawn(addr: SocketAddr, state: AppState) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<()>)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        if let Err(e) = serve(listener, state).await {
            tracing::error!("service stopped: {e}");
        }
    });
    Ok((local, handle))
}

async fn list_stages(State(state): State<AppState>) -> Json<Vec<StageSummary>> {
    Json(state.catalog.iter().map(StageSummary::from).collect())
}

fn join_error(e: tokio::task::JoinError) -> ApiError {
    ApiError::Internal(format!("worker failed: {e}"))
}

async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<CreateSessionRequest>,
) -> Result<Json<SessionView>, ApiError> {
    let entry = state
        .catalog
        .iter()
        .find(|e| e.stage.id == req.stage_id)
        .cloned()
        .ok_or_else(|| ApiError::NotFound(format!("stage {}", req.stage_id)))?;
    let opponent =
        Entrant::by_id(&req.opponent_id).map_err(|_| ApiError::NotFound(format!("opponent {}", req.opponent_id)))?;
    let config = Arc::clone(&state.config);
    let seed = req.seed.unwrap_or_else(rand::random);
    let id = uuid::Uuid::new_v4().simple().to_string();

    let session_id = id.clone();
    let session = tokio::task::spawn_blocking(move || -> Result<Session, ApiError> {
        let seat = match opponent {
            Entrant::Fixed(s) => Seat::of(s),
            Entrant::System(sys) => match run_analysis_phase(&sys, &entry, &config.budgets, config.timing, seed) {
                AnalysisOutcome::Entered { seat, .. } => seat,
                AnalysisOutcome::Disqualified { error, .. } => {
                    return Err(ApiError::Internal(format!("opponent analysis failed: {error}")))
                }
            },
        };
        let mut session =
            Session::new(session_id, entry.stage, req.human_color, seat, &config.budgets, config.timing, seed);
        session.run_ai();
        Ok(session)
    })
    .await
    .map_err(join_error)??;

    let view = session.view();
    let (tx, _) = broadcast::channel(256);
    let finished_log = session.log();
    let entry = Arc::new(SessionEntry {
        shared: RwLock::new(Shared { view: view.clone(), events: session.events().to_vec() }),
        session: Arc::new(Mutex::new(session)),
        tx,
    });
    state.sessions.write().unwrap().insert(id.clone(), entry);
    if let Some(log) = finished_log {
        state.store.add_session_log(&id, log);
    }
    tracing::info!(session = %id, stage = %view.stage_id, opponent = %view.opponent_id, "session created");
    Ok(Json(view))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(state.entry(&id)?.shared.read().unwrap().view.clone()))
}

async fn get_valid_moves(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<ValidMovesResponse>, ApiError> {
    let entry = state.entry(&id)?;
    let shared = entry.shared.read().unwrap();
    Ok(Json(ValidMovesResponse { status: shared.view.status, valid_moves: shared.view.valid_moves.clone() }))
}

async fn post_move(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(position): Json<Position>,
) -> Result<Json<MoveResponse>, ApiError> {
    let entry = state.entry(&id)?;
    let mut session = Arc::clone(&entry.session).lock_owned().await;
    let mut events = match session.human_move(position) {
        Ok(events) => events,
        Err(MoveRejection::Illegal { position, valid_moves }) => {
            return Err(ApiError::IllegalMove { position, valid_moves })
        }
        Err(MoveRejection::NotYourTurn(SessionStatus::Finished)) => {
            return Err(ApiError::Conflict("game is over".into()))
        }
        Err(MoveRejection::NotYourTurn(_)) => return Err(ApiError::Conflict("not the human's turn".into())),
    };
    entry.publish(session.view(), &events);

    let session = tokio::task::spawn_blocking(move || {
        let mut session = session;
        let replies = session.run_ai();
        (session, replies)
    })
    .await
    .map_err(join_error)?;
    let (session, replies) = session;
    let view = session.view();
    entry.publish(view.clone(), &replies);
    events.extend(replies);
    if view.status == SessionStatus::Finished {
        if let Some(log) = session.log() {
            state.store.add_session_log(&id, log);
        }
    }
    Ok(Json(MoveResponse { session: view, events }))
}

fn json_document(body: String) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], body)
}

async fn get_log(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let entry = state.entry(&id)?;
    let session = entry.session.lock().await;
    let log = session.log().ok_or_else(|| ApiError::Conflict("game is still in progress".into()))?;
    Ok(json_document(to_structured(&[log])))
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    since: Option<u64>,
}

/// Server-sent events for a session: stored events after `since`, then live ones.
/// The stream ends after the game-over event.
async fn session_events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<EventsQuery>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let entry = state.entry(&id)?;
    let since = query.since.unwrap_or(0);
    // A finished session has its whole history stored, so nothing live can follow.
    let (history, rx, finished) = {
        let shared = entry.shared.read().unwrap();
        let rx = entry.tx.subscribe();
        let history: Vec<SessionEvent> = shared.events.iter().filter(|e| e.seq() > since).cloned().collect();
        (history, rx, shared.view.status == SessionStatus::Finished)
    };
    let last = history.last().map_or(since, |e| e.seq());
    let over = |e: &SessionEvent| matches!(e, SessionEvent::GameOver { .. });
    let live = stream::unfold((rx, finished), move |(mut rx, done)| async move {
        if done {
            return None;
        }
        loop {
            match rx.recv().await {
                Ok(e) if e.seq() <= last => continue,
                Ok(e) => {
                    let done = over(&e);
                    return Some((e, (rx, done)));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    let events = stream::iter(history).chain(live);
    let sse = events.map(|e| {
        let data = serde_json::to_string(&e).expect("event serializes");
        Ok(Event::default().event(e.name()).id(e.seq().to_string()).data(data))
    });
    Ok(Sse::new(sse).keep_alive(KeepAlive::default()))
}

async fn list_replays(State(state): State<AppState>) -> Json<Vec<ReplaySummary>> {
    Json(state.store.replays().into_iter().map(|(id, log)| ReplaySummary::of(id, &log)).collect())
}

async fn get_replay(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let log = state.store.replay(&id).ok_or_else(|| ApiError::NotFound(format!("replay {id}")))?;
    Ok(json_document(to_structured(&[log])))
}

async fn list_leaderboards(State(state): State<AppState>) -> Json<Vec<String>> {
    Json(state.store.reports().into_iter().map(|r| r.id).collect())
}

async fn get_leaderboard(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<LeaderboardResponse>, ApiError> {
    let report = state.store.report(&id).ok_or_else(|| ApiError::NotFound(format!("report {id}")))?;
    Ok(Json(LeaderboardResponse::from(&report)))
}
