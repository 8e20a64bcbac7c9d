//! HTTP and WebSocket front end over the session pipeline.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use plexus_core::ingest::Credentials;
use plexus_core::session::{SessionError, SessionStatus, SourceSpec};
use plexus_core::style::print_stylesheet;
use plexus_core::{Session, SessionConfig, WireEvent};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::watch;

use crate::transport::HttpTransport;

/// One running session plus the channel that announces log growth.
pub struct SessionHandle {
    session: Mutex<Session>,
    log_len: watch::Sender<usize>,
    stop: AtomicBool,
}

impl SessionHandle {
    fn lock(&self) -> MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Events from index `from` on, and whether the log can still grow.
    fn events_from(&self, from: usize) -> (Vec<WireEvent>, bool) {
        let session = self.lock();
        let events = session.log().get(from..).map(<[WireEvent]>::to_vec).unwrap_or_default();
        let open = !matches!(session.status(), SessionStatus::Stable | SessionStatus::Failed);
        (events, open)
    }
}

/// All sessions served by one process.
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<SessionHandle>>>,
    next_id: AtomicU64,
    credentials: Option<Credentials>,
    transport: HttpTransport,
}

impl AppState {
    pub fn new(credentials: Option<Credentials>) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            credentials,
            transport: HttpTransport::new(),
        }
    }

    /// Builds the session, registers it under a fresh id (`s1`, `s2`, ...)
    /// and starts its pipeline worker.
    pub fn create_session(&self, config: SessionConfig) -> Result<String, SessionError> {
        config.validate()?;
        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::SeqCst));
        let tick = config.tick_interval;
        let session = match config.source {
            SourceSpec::Live => {
                Session::create_live(id.clone(), config, self.credentials.clone(), self.transport.clone())?
            }
            SourceSpec::Replay { .. } => Session::create(id.clone(), config)?,
        };
        let (log_len, _) = watch::channel(session.log().len());
        let handle = Arc::new(SessionHandle {
            session: Mutex::new(session),
            log_len,
            stop: AtomicBool::new(false),
        });
        self.sessions.write().unwrap().insert(id.clone(), handle.clone());
        spawn_worker(id.clone(), handle, tick);
        log::info!("session {id} started");
        Ok(id)
    }

    pub fn session(&self, id: &str) -> Option<Arc<SessionHandle>> {
        self.sessions.read().unwrap().get(id).cloned()
    }

    /// Asks every pipeline worker to stop after its current tick.
    pub fn shutdown(&self) {
        for handle in self.sessions.read().unwrap().values() {
            handle.stop.store(true, Ordering::SeqCst);
        }
    }
}

/// Ticks the session until it settles, fails or is stopped. Runs on its own
/// thread because live sources block on HTTP.
fn spawn_worker(id: String, handle: Arc<SessionHandle>, tick: Duration) {
    let name = format!("pipeline-{id}");
    let spawned = std::thread::Builder::new().name(name).spawn(move || loop {
        if handle.stop.load(Ordering::SeqCst) {
            break;
        }
        let (len, done) = {
            let mut session = handle.lock();
            if let Err(e) = session.tick() {
                log::error!("session {id}: {e}");
            }
            let done = matches!(session.status(), SessionStatus::Stable | SessionStatus::Failed);
            (session.log().len(), done)
        };
        handle.log_len.send_replace(len);
        if done {
            log::info!("session {id} finished after {len} events");
            break;
        }
        std::thread::sleep(tick);
    });
    if let Err(e) = spawned {
        log::error!("cannot start pipeline worker: {e}");
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    #[default]
    Replay,
    Live,
}

/// Body of `POST /api/sessions`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    pub topic_a: String,
    pub topic_b: String,
    #[serde(default)]
    pub source: SourceKind,
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub stylesheet: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tick_ms: Option<u64>,
    #[serde(default)]
    pub lang: Option<String>,
    #[serde(default)]
    pub exclude_retweets: Option<bool>,
}

impl CreateSessionRequest {
    pub fn into_config(self) -> SessionConfig {
        let source = match self.source {
            SourceKind::Replay => SourceSpec::Replay { corpus: self.corpus },
            SourceKind::Live => SourceSpec::Live,
        };
        let mut config = SessionConfig::new(&self.topic_a, &self.topic_b, source, self.seed);
        for query in [&mut config.topic_a, &mut config.topic_b] {
            if let Some(lang) = &self.lang {
                query.lang = lang.clone();
            }
            if let Some(exclude) = self.exclude_retweets {
                query.exclude_retweets = exclude;
            }
        }
        config.lexicon = self.lexicon;
        config.stylesheet = self.stylesheet;
        if let Some(ms) = self.tick_ms {
            config.tick_interval = Duration::from_millis(ms);
        }
        config
    }
}

fn error(status: StatusCode, message: impl ToString) -> Response {
    (status, Json(json!({ "error": message.to_string() }))).into_response()
}

fn unknown_session(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("session `{id}` not found"))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(session_summary))
        .route("/api/sessions/{id}/snapshot", get(snapshot))
        .route("/api/sessions/{id}/stylesheet", get(stylesheet))
        .route("/api/sessions/{id}/nodes/{node_id}", get(node_detail))
        .route("/api/sessions/{id}/events", get(events))
        .with_state(state)
}

async fn create_session(State(state): State<Arc<AppState>>, body: axum::body::Bytes) -> Response {
    let request: CreateSessionRequest = match serde_json::from_slice(&body) {
        Ok(request) => request,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("invalid session config: {e}")),
    };
    let config = request.into_config();
    let created = tokio::task::spawn_blocking(move || state.create_session(config)).await;
    match created {
        Ok(Ok(id)) => (StatusCode::CREATED, Json(json!({ "session_id": id }))).into_response(),
        Ok(Err(e)) => error(StatusCode::BAD_REQUEST, e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn session_summary(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match state.session(&id) {
        Some(handle) => Json(handle.lock().summary()).into_response(),
        None => unknown_session(&id),
    }
}

async fn snapshot(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match state.session(&id) {
        Some(handle) => Json(handle.lock().snapshot().clone()).into_response(),
        None => unknown_session(&id),
    }
}

async fn stylesheet(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match state.session(&id) {
        Some(handle) => {
            let text = print_stylesheet(handle.lock().rules());
            ([(header::CONTENT_TYPE, "text/css; charset=utf-8")], text).into_response()
        }
        None => unknown_session(&id),
    }
}

async fn node_detail(State(state): State<Arc<AppState>>, Path((id, node_id)): Path<(String, String)>) -> Response {
    let Some(handle) = state.session(&id) else {
        return unknown_session(&id);
    };
    let detail = handle.lock().node_detail(&node_id);
    match detail {
        Ok(detail) => Json(detail).into_response(),
        Err(e @ SessionError::NotFound(_)) => error(StatusCode::NOT_FOUND, e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn events(State(state): State<Arc<AppState>>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    match state.session(&id) {
        Some(handle) => ws.on_upgrade(move |socket| stream_events(socket, handle)),
        None => unknown_session(&id),
    }
}

/// Sends the whole log from seq 0, then every new event as it is appended.
/// The socket is closed once the session can produce no further events.
async fn stream_events(mut socket: WebSocket, handle: Arc<SessionHandle>) {
    let mut changes = handle.log_len.subscribe();
    let mut sent = 0usize;
    loop {
        changes.mark_unchanged();
        let (events, open) = handle.events_from(sent);
        for event in events {
            let text = match serde_json::to_string(&event) {
                Ok(text) => text,
                Err(e) => {
                    log::error!("cannot encode event {}: {e}", event.seq);
                    return;
                }
            };
            if socket.send(Message::Text(text.into())).await.is_err() {
                return;
            }
            sent += 1;
        }
        if !open {
            break;
        }
        tokio::select! {
            changed = changes.changed() => {
                if changed.is_err() {
                    break;
                }
            }
            incoming = socket.recv() => match incoming {
                None | Some(Err(_)) | Some(Ok(Message::Close(_))) => return,
                Some(Ok(_)) => {}
            },
        }
    }
    let _ = socket.send(Message::Close(None)).await;
}
