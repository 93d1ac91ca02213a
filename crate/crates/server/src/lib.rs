//! Live control server for a running simulation.
//!
//! Endpoints, all under `/v1`:
//! - `GET /state`: the latest between-tick snapshot plus the `paused` flag;
//! - `POST /command`: queue a command, answered with the tick it applies at;
//! - `GET /events?interval=k`: server-sent snapshots every `k` ticks, and
//!   heartbeats while paused;
//! - `GET /scenario`: the scenario being run;
//! - `GET /log`: world commands accepted so far, with their apply ticks.

use std::convert::Infallible;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{Stream, StreamExt};
use rdsim_core::engine::Command;
use rdsim_core::Scenario;
use serde::Deserialize;
use serde_json::json;
use tokio_stream::wrappers::BroadcastStream;

mod session;

pub use session::{Event, Hub, Session, SessionEnd, SessionOptions, StateDoc};

pub struct ServerConfig {
    pub scenario: Scenario,
    pub port: u16,
    pub ticks_per_second: f64,
    pub trace: Option<PathBuf>,
    pub command_log: Option<PathBuf>,
    pub snapshot_every: u64,
}

pub fn router(hub: Arc<Hub>) -> Router {
    let v1 = Router::new()
        .route("/state", get(get_state))
        .route("/command", post(post_command))
        .route("/events", get(events))
        .route("/scenario", get(get_scenario))
        .route("/log", get(get_log));
    Router::new().nest("/v1", v1).with_state(hub)
}

async fn get_state(State(hub): State<Arc<Hub>>) -> Json<StateDoc> {
    Json(hub.latest().as_ref().clone())
}

async fn get_scenario(State(hub): State<Arc<Hub>>) -> Json<Scenario> {
    Json(hub.scenario().clone())
}

async fn get_log(State(hub): State<Arc<Hub>>) -> Response {
    match hub.command_log().await {
        Some(log) => Json(log).into_response(),
        None => closed(),
    }
}

fn closed() -> Response {
    (StatusCode::SERVICE_UNAVAILABLE, Json(json!({ "error": "simulation has stopped" }))).into_response()
}

async fn post_command(State(hub): State<Arc<Hub>>, body: String) -> Response {
    let command: Command = match serde_json::from_str(&body) {
        Ok(c) => c,
        Err(e) => {
            return (StatusCode::BAD_REQUEST, Json(json!({ "error": format!("malformed command: {e}") })))
                .into_response()
        }
    };
    match hub.submit(command).await {
        Ok(Ok(ack)) => Json(ack).into_response(),
        Ok(Err(e)) => (StatusCode::BAD_REQUEST, Json(json!({ "error": e.to_string() }))).into_response(),
        Err(_) => closed(),
    }
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    #[serde(default = "one")]
    interval: u64,
}

fn one() -> u64 {
    1
}

async fn events(State(hub): State<Arc<Hub>>, Query(q): Query<EventsQuery>) -> Response {
    if q.interval == 0 {
        return (StatusCode::BAD_REQUEST, Json(json!({ "error": "interval must be at least 1" }))).into_response();
    }
    Sse::new(event_stream(&hub, q.interval)).keep_alive(KeepAlive::default()).into_response()
}

/// Snapshots whose tick is a multiple of `interval`, plus heartbeats. A
/// subscriber that falls too far behind is disconnected rather than served
/// a sequence with holes.
pub fn event_stream(hub: &Hub, interval: u64) -> impl Stream<Item = Result<SseEvent, Infallible>> {
    BroadcastStream::new(hub.subscribe()).take_while(|item| futures::future::ready(item.is_ok())).filter_map(
        move |item| {
            let out = match item {
                Ok(Event::Tick(doc)) if doc.snapshot.tick % interval == 0 => {
                    Some(SseEvent::default().event("snapshot").json_data(&*doc).expect("snapshot serializes"))
                }
                Ok(Event::Heartbeat { tick }) => Some(
                    SseEvent::default()
                        .event("heartbeat")
                        .json_data(json!({ "tick": tick, "paused": true }))
                        .expect("heartbeat serializes"),
                ),
                _ => None,
            };
            futures::future::ready(out.map(Ok))
        },
    )
}

/// Runs the server until interrupted, then finishes the trace and writes
/// the command log.
pub fn serve_blocking(config: ServerConfig) -> io::Result<()> {
    let trace: Option<session::Sink> = match &config.trace {
        Some(p) => Some(Box::new(BufWriter::new(File::create(p)?))),
        None => None,
    };
    let session = Session::start(
        config.scenario,
        SessionOptions {
            ticks_per_second: Some(config.ticks_per_second),
            start_paused: false,
            trace,
            snapshot_every: config.snapshot_every,
            ..SessionOptions::default()
        },
    )?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("rdsim: serving on http://{}/v1", listener.local_addr()?);
        axum::serve(listener, router(session.hub()))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    let end = session.shutdown()?;
    if let Some(path) = &config.command_log {
        let mut out = BufWriter::new(File::create(path)?);
        for c in &end.command_log {
            serde_json::to_writer(&mut out, c)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
    }
    eprintln!("rdsim: stopped after {} ticks", end.ticks);
    match end.error {
        Some(e) => Err(io::Error::other(e)),
        None => Ok(()),
    }
}
