//! Local game service over HTTP and JSON.
//!
//! Each session owns one [`Game`] behind a mutex, so moves on a session are
//! applied in a single total order. Subscribers get one `move` event per
//! accepted move, pushed while the session lock is held, so event order is
//! log order.

use std::collections::HashMap;
use std::convert::Infallible;
use std::hash::{BuildHasher, RandomState};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;
use tokio_stream::wrappers::UnboundedReceiverStream;
use tokio_stream::{Stream, StreamExt};

use qchess::bounds::Guard;
use qchess::game::DisplayState;
use qchess::notation::{PositionDocument, SaveDocument};
use qchess::{Game, GameStatus, TurnPolicy, Variant};

/// Version stamped on every document this service emits.
pub const API_VERSION: u32 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    /// FEN string, or a position document as a JSON object or string.
    pub position: Option<serde_json::Value>,
    pub seed: Option<u64>,
    pub policy: Option<TurnPolicy>,
    pub guard: Option<Guard>,
    /// Resume a saved game instead; excludes the other fields.
    pub save: Option<SaveDocument>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRequest {
    #[serde(rename = "move")]
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionDocument {
    pub version: u32,
    pub id: u64,
    pub seed: u64,
    pub policy: TurnPolicy,
    pub snapshot: DisplayState,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rejection {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoveResponse {
    pub version: u32,
    pub accepted: bool,
    /// Canonical text as logged; absent when the move was rejected.
    pub notation: Option<String>,
    pub variant: Option<Variant>,
    pub outcome: Option<bool>,
    pub probability: Option<f64>,
    /// `no_effect` for a legal move that changed nothing.
    pub code: Option<&'static str>,
    pub rejection: Option<Rejection>,
    pub status: GameStatus,
    pub snapshot: DisplayState,
}

/// Payload of one `move` event.
#[derive(Debug, Clone, Serialize)]
pub struct MoveEvent {
    pub version: u32,
    pub ply: u32,
    pub notation: String,
    pub outcome: Option<bool>,
    pub snapshot: DisplayState,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("no game `{id}`"),
        )
    }

    fn bad_document(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_document", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({
            "version": API_VERSION,
            "error": { "code": self.code, "message": self.message },
        });
        (self.status, Json(body)).into_response()
    }
}

struct Session {
    game: Game,
    seed: u64,
    subscribers: Vec<mpsc::UnboundedSender<MoveEvent>>,
}

impl Session {
    fn document(&self, id: u64) -> SessionDocument {
        SessionDocument {
            version: API_VERSION,
            id,
            seed: self.seed,
            policy: self.game.policy(),
            snapshot: self.game.snapshot(),
        }
    }

    fn publish(&mut self, event: MoveEvent) {
        self.subscribers.retain(|tx| tx.send(event.clone()).is_ok());
    }
}

#[derive(Default)]
struct Registry {
    sessions: RwLock<HashMap<u64, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

/// Shared service state; cheap to clone.
#[derive(Clone, Default)]
pub struct AppState(Arc<Registry>);

impl AppState {
    pub fn new() -> Self {
        AppState::default()
    }

    fn insert(&self, session: Session) -> (u64, SessionDocument) {
        let id = self.0.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let doc = session.document(id);
        self.0
            .sessions
            .write()
            .expect("registry lock")
            .insert(id, Arc::new(Mutex::new(session)));
        (id, doc)
    }

    fn session(&self, id: &str) -> Result<(u64, Arc<Mutex<Session>>), ApiError> {
        let n: u64 = id.parse().map_err(|_| ApiError::not_found(id))?;
        let sessions = self.0.sessions.read().expect("registry lock");
        let s = sessions.get(&n).ok_or_else(|| ApiError::not_found(id))?;
        Ok((n, Arc::clone(s)))
    }
}

fn lock(s: &Mutex<Session>) -> MutexGuard<'_, Session> {
    s.lock().expect("session lock")
}

/// An empty body reads as the type's default.
fn parse_body<T: DeserializeOwned + Default>(body: &[u8]) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_document(e.to_string()))
}

fn new_session(req: CreateRequest) -> Result<Session, ApiError> {
    if let Some(doc) = req.save {
        if req.position.is_some() || req.seed.is_some() || req.policy.is_some() {
            return Err(ApiError::bad_document(
                "`save` excludes position, seed and policy",
            ));
        }
        let game = Game::load(&doc).map_err(|e| ApiError::bad_document(e.to_string()))?;
        let game = match req.guard {
            Some(g) => game.with_guard(g),
            None => game,
        };
        return Ok(Session {
            seed: doc.seed,
            game,
            subscribers: Vec::new(),
        });
    }
    let seed = req.seed.unwrap_or_else(|| RandomState::new().hash_one(0u8));
    let policy = req.policy.unwrap_or_default();
    let mut game = match req.position {
        None => Game::from_state(qchess::GameState::start(), seed, policy),
        Some(serde_json::Value::String(text)) => Game::from_position(&text, seed, policy)
            .map_err(|e| ApiError::bad_document(e.to_string()))?,
        Some(v @ serde_json::Value::Object(_)) => {
            let doc: PositionDocument =
                serde_json::from_value(v).map_err(|e| ApiError::bad_document(e.to_string()))?;
            let state = doc
                .to_state()
                .map_err(|e| ApiError::bad_document(e.to_string()))?;
            Game::from_state(state, seed, policy)
        }
        Some(_) => {
            return Err(ApiError::bad_document(
                "`position` must be a string or an object",
            ))
        }
    };
    if let Some(g) = req.guard {
        game = game.with_guard(g);
    }
    Ok(Session {
        game,
        seed,
        subscribers: Vec::new(),
    })
}

async fn create_game(
    State(app): State<AppState>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let session = new_session(parse_body(&body)?)?;
    let (_, doc) = app.insert(session);
    Ok((StatusCode::CREATED, Json(doc)))
}

async fn get_game(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionDocument>, ApiError> {
    let (n, s) = app.session(&id)?;
    let doc = lock(&s).document(n);
    Ok(Json(doc))
}

async fn post_move(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<MoveResponse>, ApiError> {
    let (_, s) = app.session(&id)?;
    let req: MoveRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_document(e.to_string()))?;
    let mut session = lock(&s);
    let response = match session.game.submit_move(&req.text) {
        Ok(turn) => {
            let snapshot = session.game.snapshot();
            if turn.accepted {
                let ply = session.game.ply();
                session.publish(MoveEvent {
                    version: API_VERSION,
                    ply,
                    notation: turn.notation.clone(),
                    outcome: turn.outcome,
                    snapshot: snapshot.clone(),
                });
            }
            MoveResponse {
                version: API_VERSION,
                accepted: turn.accepted,
                notation: Some(turn.notation),
                variant: Some(turn.variant),
                outcome: turn.outcome,
                probability: turn.probability,
                code: turn.code,
                rejection: None,
                status: turn.status,
                snapshot,
            }
        }
        Err(e) => MoveResponse {
            version: API_VERSION,
            accepted: false,
            notation: None,
            variant: None,
            outcome: None,
            probability: None,
            code: None,
            rejection: Some(Rejection {
                code: e.code(),
                message: e.to_string(),
            }),
            status: session.game.status(),
            snapshot: session.game.snapshot(),
        },
    };
    Ok(Json(response))
}

async fn events(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let (_, s) = app.session(&id)?;
    let (tx, rx) = mpsc::unbounded_channel();
    lock(&s).subscribers.push(tx);
    let stream = UnboundedReceiverStream::new(rx).map(|ev: MoveEvent| {
        let data = serde_json::to_string(&ev).expect("events serialize");
        Ok(Event::default()
            .event("move")
            .id(ev.ply.to_string())
            .data(data))
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

async fn export_log(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let (_, s) = app.session(&id)?;
    let text = lock(&s).game.log_text();
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text))
}

async fn export_save(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SaveDocument>, ApiError> {
    let (_, s) = app.session(&id)?;
    let doc = lock(&s).game.save();
    Ok(Json(doc))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/games", post(create_game))
        .route("/v1/games/{id}", get(get_game))
        .route("/v1/games/{id}/moves", post(post_move))
        .route("/v1/games/{id}/events", get(events))
        .route("/v1/games/{id}/log", get(export_log))
        .route("/v1/games/{id}/save", get(export_save))
        .layer(tower_http::cors::CorsLayer::permissive())
        .with_state(state)
}
