//! HTTP API for the human-trial quiz.
//!
//! Problems are served in their public form only. Every answer is appended to
//! a per-session JSON-lines log, and summaries are computed from that log.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mns_core::generator::Problem;
use mns_core::render::{rasterize, render_panel, RenderError, RenderSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub const DEFAULT_SESSION_LEN: usize = 20;

struct Session {
    order: Vec<String>,
    answered: HashSet<String>,
    log: PathBuf,
}

pub struct AppState {
    problems: BTreeMap<String, Problem>,
    ids: Vec<String>,
    sessions: Mutex<HashMap<String, Session>>,
    log_dir: PathBuf,
    render: RenderSpec,
    next_session: Mutex<u64>,
}

impl AppState {
    pub fn new(problems: Vec<Problem>, log_dir: PathBuf, render: RenderSpec) -> std::io::Result<AppState> {
        fs::create_dir_all(&log_dir)?;
        let ids = problems.iter().map(|p| p.id.clone()).collect();
        Ok(AppState {
            problems: problems.into_iter().map(|p| (p.id.clone(), p)).collect(),
            ids,
            sessions: Mutex::new(HashMap::new()),
            log_dir,
            render,
            next_session: Mutex::new(1),
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/session/new", get(new_session))
        .route("/api/session/{id}/summary", get(summary))
        .route("/api/problem/{id}", get(problem))
        .route("/api/problem/{id}/panel/{k}", get(panel_image))
        .route("/api/answer", post(answer))
        .with_state(state)
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(json!({ "error": msg.into() }))).into_response()
}

#[derive(Debug, Deserialize)]
struct NewSessionQuery {
    seed: Option<u64>,
    count: Option<usize>,
}

async fn new_session(State(st): State<Arc<AppState>>, Query(q): Query<NewSessionQuery>) -> Response {
    let n = {
        let mut next = st.next_session.lock().expect("session counter");
        // skip ids whose logs survive from an earlier run
        while st.log_dir.join(format!("s{:06}.jsonl", *next)).exists() {
            *next += 1;
        }
        let n = *next;
        *next += 1;
        n
    };
    let id = format!("s{n:06}");
    let mut order = st.ids.clone();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(q.seed.unwrap_or(n)));
    order.truncate(q.count.unwrap_or(DEFAULT_SESSION_LEN));
    let log = st.log_dir.join(format!("{id}.jsonl"));
    if let Err(e) = fs::write(&log, b"") {
        return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string());
    }
    let body = json!({ "session": id, "problems": order });
    st.sessions.lock().expect("sessions").insert(id, Session { order, answered: HashSet::new(), log });
    Json(body).into_response()
}

async fn problem(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(p) = st.problems.get(&id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown problem {id}"));
    };
    let public = p.public();
    let svg: Result<Vec<String>, RenderError> = (0..3).map(|k| render_panel(&public, k, &st.render)).collect();
    match svg {
        Ok(svg) => Json(json!({
            "problem": public,
            "images": (0..3).map(|k| format!("/api/problem/{id}/panel/{k}")).collect::<Vec<_>>(),
            "svg": svg,
        }))
        .into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn panel_image(
    State(st): State<Arc<AppState>>,
    Path((id, k)): Path<(String, usize)>,
    headers: HeaderMap,
) -> Response {
    let Some(p) = st.problems.get(&id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown problem {id}"));
    };
    let svg = match render_panel(&p.public(), k, &st.render) {
        Ok(s) => s,
        Err(RenderError::NoSuchPanel(k)) => return error(StatusCode::NOT_FOUND, format!("no panel {k}")),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let wants_png = headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|a| a.contains("image/png") && !a.contains("image/svg+xml"));
    if !wants_png {
        return ([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response();
    }
    match rasterize(&svg) {
        Ok(png) => ([(header::CONTENT_TYPE, "image/png")], png).into_response(),
        Err(RenderError::RasterBackendUnavailable) => error(StatusCode::NOT_ACCEPTABLE, "PNG output not available"),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerRequest {
    session: String,
    id: String,
    value: i64,
    #[serde(default)]
    elapsed_ms: u64,
}

/// One line of a session log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogEntry {
    pub session: String,
    pub problem_id: String,
    pub value: u8,
    pub correct: bool,
    pub elapsed_ms: u64,
    #[serde(rename = "type")]
    pub problem_type: String,
    pub interpretation: String,
}

async fn answer(State(st): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: AnswerRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let value = match u8::try_from(req.value) {
        Ok(v) if (1..=99).contains(&v) => v,
        _ => return error(StatusCode::BAD_REQUEST, "value must be an integer in [1, 99]"),
    };
    let Some(p) = st.problems.get(&req.id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown problem {}", req.id));
    };
    let mut sessions = st.sessions.lock().expect("sessions");
    let Some(session) = sessions.get_mut(&req.session) else {
        return error(StatusCode::NOT_FOUND, format!("unknown session {}", req.session));
    };
    if !session.order.contains(&req.id) {
        return error(StatusCode::NOT_FOUND, format!("problem {} is not part of this session", req.id));
    }
    if session.answered.contains(&req.id) {
        return error(StatusCode::CONFLICT, format!("problem {} already answered", req.id));
    }
    let entry = LogEntry {
        session: req.session.clone(),
        problem_id: req.id.clone(),
        value,
        correct: value == p.answer,
        elapsed_ms: req.elapsed_ms,
        problem_type: p.spec.problem_type.name().to_string(),
        interpretation: p.spec.algebra.interpretation.kind().name().to_string(),
    };
    let mut line = serde_json::to_vec(&entry).expect("log entries serialize");
    line.push(b'\n');
    let written = OpenOptions::new().append(true).open(&session.log).and_then(|mut f| f.write_all(&line));
    if let Err(e) = written {
        return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string());
    }
    session.answered.insert(req.id);
    Json(json!({ "correct": entry.correct })).into_response()
}

async fn summary(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let log = match st.sessions.lock().expect("sessions").get(&id) {
        Some(s) => s.log.clone(),
        None => return error(StatusCode::NOT_FOUND, format!("unknown session {id}")),
    };
    let text = match fs::read_to_string(&log) {
        Ok(t) => t,
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let mut cells: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    let (mut correct, mut total) = (0u64, 0u64);
    for line in text.lines().filter(|l| !l.is_empty()) {
        let Ok(e) = serde_json::from_str::<LogEntry>(line) else { continue };
        let c = cells.entry((e.problem_type, e.interpretation)).or_default();
        c.0 += u64::from(e.correct);
        c.1 += 1;
        correct += u64::from(e.correct);
        total += 1;
    }
    let ratio = |c: u64, t: u64| if t == 0 { None } else { Some(c as f64 / t as f64) };
    Json(json!({
        "session": id,
        "correct": correct,
        "total": total,
        "accuracy": ratio(correct, total),
        "cells": cells.iter().map(|((t, i), (c, n))| json!({
            "type": t, "interpretation": i, "correct": c, "total": n, "accuracy": ratio(*c, *n),
        })).collect::<Vec<_>>(),
    }))
    .into_response()
}

/// Binds and serves until the process is stopped.
pub async fn serve(state: AppState, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state))).await
}
