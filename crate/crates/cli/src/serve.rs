//! HTTP transport for the session protocol: `POST /rpc` takes one protocol
//! message and returns the reply; `GET /sessions/{id}/stream` pushes a
//! server-sent event per completed iteration.

use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response as HttpResponse};
use axum::routing::{get, post};
use axum::{Json, Router};
use clap::Args;
use futures_util::stream;

use qihsi_core::session::{Response, SessionManager, Status};
use qihsi_core::RunConfig;

#[derive(Args)]
pub struct ServeArgs {
    /// 0 picks a free port.
    #[arg(long, default_value_t = 8750)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Base run configuration that `create` messages are layered over.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seconds before an untouched session is dropped.
    #[arg(long, default_value_t = 1800)]
    idle_timeout: u64,
}

type Shared = Arc<SessionManager>;

fn status_for(r: &Response) -> StatusCode {
    match r {
        Response::Error { code, .. } if code == "no_such_session" => StatusCode::NOT_FOUND,
        Response::Error { .. } => StatusCode::BAD_REQUEST,
        _ => StatusCode::OK,
    }
}

async fn rpc(State(mgr): State<Shared>, body: String) -> HttpResponse {
    // advancing runs engine steps, keep them off the async workers
    let reply = tokio::task::spawn_blocking(move || mgr.handle_json(&body))
        .await
        .unwrap_or_else(|e| Response::error("internal", e.to_string()));
    (status_for(&reply), Json(reply)).into_response()
}

async fn stream(State(mgr): State<Shared>, Path(id): Path<String>) -> HttpResponse {
    let Some(session) = mgr.get(&id) else {
        let r = Response::error("no_such_session", format!("unknown session `{id}`"));
        return (StatusCode::NOT_FOUND, Json(r)).into_response();
    };
    let events = stream::unfold((session, None::<usize>, false), |(s, last, done)| async move {
        if done {
            return None;
        }
        loop {
            let snap = s.snapshot();
            if last != Some(snap.iteration) {
                let finished = snap.status == Status::Finished;
                let ev = Event::default()
                    .event("state")
                    .json_data(Response::State((*snap).clone()))
                    .unwrap_or_else(|_| Event::default().comment("encode failure"));
                return Some((Ok::<_, Infallible>(ev), (s, Some(snap.iteration), finished)));
            }
            tokio::time::sleep(Duration::from_millis(25)).await;
        }
    });
    Sse::new(events).keep_alive(KeepAlive::default()).into_response()
}

pub fn router(mgr: Shared) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/rpc", post(rpc))
        .route("/sessions/{id}/stream", get(stream))
        .with_state(mgr)
}

/// Background pacing of playing sessions and idle eviction.
fn spawn_housekeeping(mgr: Shared) {
    std::thread::spawn(move || {
        let mut last_sweep = Instant::now();
        loop {
            std::thread::sleep(Duration::from_millis(10));
            let now = Instant::now();
            mgr.tick_playing(now);
            if now.duration_since(last_sweep) >= Duration::from_secs(30) {
                mgr.evict_idle(now);
                last_sweep = now;
            }
        }
    });
}

pub fn serve(args: ServeArgs) -> Result<()> {
    let mut mgr = SessionManager::new(Duration::from_secs(args.idle_timeout));
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        base.clone().validated()?;
        mgr = mgr.with_base_config(&base)?;
    }
    let mgr = Arc::new(mgr);
    spawn_housekeeping(mgr.clone());
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .with_context(|| format!("binding {}:{}", args.host, args.port))?;
        let addr = listener.local_addr()?;
        println!("serve listening=http://{addr}");
        axum::serve(listener, router(mgr)).await?;
        Ok(())
    })
}
