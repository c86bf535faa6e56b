//! Interactive optimization sessions driven by a JSON message protocol.
//!
//! Control is request/response ([`SessionManager::handle`]). Snapshots are
//! published after every completed iteration and can be read at any time
//! without waiting for a running advance.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dmil::{normalize_weights, Feedback, FeedbackEvent, FeedbackSource};
use crate::engine::{c1_schedule, Optimizer, RunConfig, RunRecord};
use crate::error::{Error, Result};

/// Metric values kept in each snapshot.
pub const TRACE_TAIL: usize = 50;
pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Paused,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub f: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceTail {
    pub igd: Vec<f64>,
    pub hv: Vec<f64>,
}

/// Consistent view of a session at an iteration boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub session: String,
    pub iteration: usize,
    pub max_iterations: usize,
    /// Coefficient of the latest completed iteration (of the first one before any step).
    pub c1: f64,
    pub front: Vec<FrontPoint>,
    pub weights: Vec<f64>,
    pub last_event: Option<FeedbackEvent>,
    /// Normalized weights waiting for the next period boundary.
    pub pending_feedback: Option<Vec<f64>>,
    pub tau: usize,
    pub trace: TraceTail,
    pub status: Status,
}

/// A feedback submission as received.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackMessage {
    pub weights: Vec<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub submitted_at_iteration: Option<usize>,
}

/// A queued submission replaced by a later one in the same period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Superseded {
    pub weights: Vec<f64>,
    pub submitted_at_iteration: usize,
    pub replaced_at_iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub session: String,
    /// Normalized weights as they will be applied.
    pub weights: Vec<f64>,
    /// Iteration whose completion triggers the update; absent with `no_effect`.
    pub applies_at: Option<usize>,
    pub no_effect: bool,
    /// A previously queued submission was replaced.
    pub superseded: bool,
}

#[derive(Debug, Default)]
struct Pending {
    feedback: Option<(Feedback, usize)>,
    superseded: Vec<Superseded>,
}

/// Hands the queued submission to the engine at a period boundary.
struct QueueSource<'a>(&'a Mutex<Pending>);

impl FeedbackSource for QueueSource<'_> {
    fn feedback(&mut self, _: usize, _: usize, _: usize) -> Option<Feedback> {
        lock(self.0).feedback.take().map(|(fb, _)| fb)
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Debug, Clone, Copy)]
struct Play {
    /// Iterations per second; `None` means as fast as the ticker runs.
    rate: Option<f64>,
    last: Instant,
}

pub struct Session {
    id: String,
    engine: Mutex<Optimizer>,
    published: RwLock<Arc<StateSnapshot>>,
    pending: Mutex<Pending>,
    play: Mutex<Option<Play>>,
    last_used: Mutex<Instant>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session").field("id", &self.id).finish_non_exhaustive()
    }
}

impl Session {
    fn new(id: String, config: RunConfig) -> Result<Self> {
        let engine = Optimizer::from_config(config)?;
        let s = Self {
            id,
            published: RwLock::new(Arc::new(placeholder())),
            engine: Mutex::new(engine),
            pending: Mutex::new(Pending::default()),
            play: Mutex::new(None),
            last_used: Mutex::new(Instant::now()),
        };
        s.publish(&lock(&s.engine));
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    fn touch(&self) {
        *lock(&self.last_used) = Instant::now();
    }

    fn status(&self, engine: &Optimizer) -> Status {
        if engine.is_finished() {
            Status::Finished
        } else if lock(&self.play).is_some() {
            Status::Running
        } else {
            Status::Paused
        }
    }

    fn publish(&self, engine: &Optimizer) {
        let st = engine.state();
        let traces = engine.traces();
        let tail = |v: &[f64]| v[v.len().saturating_sub(TRACE_TAIL)..].to_vec();
        let snap = StateSnapshot {
            session: self.id.clone(),
            iteration: st.iteration,
            max_iterations: st.max_iterations,
            c1: engine
                .last_c1()
                .unwrap_or_else(|| c1_schedule(0, st.max_iterations).expect("budget >= 1")),
            front: st
                .archive
                .members()
                .iter()
                .map(|s| FrontPoint {
                    f: s.f.to_vec(),
                    x: s.x.to_vec(),
                })
                .collect(),
            weights: st.dmil.weights().to_vec(),
            last_event: st.dmil.event_log().last().cloned(),
            pending_feedback: lock(&self.pending)
                .feedback
                .as_ref()
                .map(|(fb, _)| fb.weights.clone()),
            tau: st.dmil.tau(),
            trace: TraceTail {
                igd: tail(&traces.igd),
                hv: tail(&traces.hv),
            },
            status: self.status(engine),
        };
        *self.published.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(snap);
    }

    /// The latest published snapshot. Never blocks on a running advance.
    pub fn snapshot(&self) -> Arc<StateSnapshot> {
        self.touch();
        self.published.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Runs up to `n` iterations, consuming queued feedback at period boundaries.
    pub fn advance(&self, n: usize) -> Result<Arc<StateSnapshot>> {
        self.touch();
        let mut engine = lock(&self.engine);
        for _ in 0..n {
            if engine.is_finished() {
                break;
            }
            engine.step(&mut QueueSource(&self.pending))?;
            self.publish(&engine);
        }
        if engine.is_finished() {
            *lock(&self.play) = None;
        }
        self.publish(&engine);
        drop(engine);
        Ok(self.snapshot())
    }

    /// Queues feedback for the next boundary; a later submission in the same
    /// period replaces it.
    pub fn submit_feedback(&self, msg: &FeedbackMessage) -> Result<Ack> {
        self.touch();
        let engine = lock(&self.engine);
        let m = engine.problem().spec().objectives;
        if msg.weights.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: msg.weights.len(),
            });
        }
        let weights = normalize_weights(&msg.weights)?;
        if let Some(g) = msg.gamma {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::InvalidParameter(format!("gamma {g} outside [0, 1]")));
            }
        }
        let st = engine.state();
        let tau = st.dmil.tau();
        let next = (st.iteration / tau + 1) * tau;
        let no_effect = !engine.config().dmil.enabled || next > st.max_iterations;
        let mut superseded = false;
        if !no_effect {
            let mut pending = lock(&self.pending);
            if let Some((old, at)) = pending.feedback.take() {
                pending.superseded.push(Superseded {
                    weights: old.weights,
                    submitted_at_iteration: at,
                    replaced_at_iteration: st.iteration,
                });
                superseded = true;
            }
            pending.feedback = Some((
                Feedback {
                    weights: weights.clone(),
                    gamma: msg.gamma,
                },
                msg.submitted_at_iteration.unwrap_or(st.iteration),
            ));
        }
        self.publish(&engine);
        Ok(Ack {
            session: self.id.clone(),
            weights,
            applies_at: (!no_effect).then_some(next),
            no_effect,
            superseded,
        })
    }

    pub fn superseded_log(&self) -> Vec<Superseded> {
        lock(&self.pending).superseded.clone()
    }

    /// Starts paced autorun; `rate` caps iterations per second.
    pub fn play(&self, rate: Option<f64>) -> Result<Arc<StateSnapshot>> {
        if let Some(r) = rate {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidParameter(format!("rate must be positive, got {r}")));
            }
        }
        let engine = lock(&self.engine);
        if !engine.is_finished() {
            *lock(&self.play) = Some(Play {
                rate,
                last: Instant::now(),
            });
        }
        self.publish(&engine);
        drop(engine);
        Ok(self.snapshot())
    }

    pub fn pause(&self) -> Arc<StateSnapshot> {
        *lock(&self.play) = None;
        self.publish(&lock(&self.engine));
        self.snapshot()
    }

    /// One autorun iteration when playing and the rate allows it.
    fn tick(&self, now: Instant) -> Result<bool> {
        let due = {
            let mut play = lock(&self.play);
            match play.as_mut() {
                Some(p) if p.rate.is_none_or(|r| now.duration_since(p.last).as_secs_f64() * r >= 1.0) => {
                    p.last = now;
                    true
                }
                _ => false,
            }
        };
        if due {
            self.advance(1)?;
        }
        Ok(due)
    }

    /// Full record of the session so far.
    pub fn record(&self) -> Result<RunRecord> {
        lock(&self.engine).record()
    }

    fn idle_since(&self) -> Instant {
        *lock(&self.last_used)
    }
}

fn placeholder() -> StateSnapshot {
    StateSnapshot {
        session: String::new(),
        iteration: 0,
        max_iterations: 0,
        c1: 0.0,
        front: Vec::new(),
        weights: Vec::new(),
        last_event: None,
        pending_feedback: None,
        tau: 1,
        trace: TraceTail::default(),
        status: Status::Paused,
    }
}

/// Client-to-server messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Request {
    Create {
        config: serde_json::Value,
    },
    Advance {
        session: String,
        n: usize,
    },
    Feedback {
        session: String,
        #[serde(flatten)]
        message: FeedbackMessage,
    },
    Snapshot {
        session: String,
    },
    Play {
        session: String,
        #[serde(default)]
        rate: Option<f64>,
    },
    Pause {
        session: String,
    },
    Close {
        session: String,
    },
}

/// Server-to-client messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Created { session: String },
    State(StateSnapshot),
    Ack(Ack),
    Closed { session: String },
    Error { code: String, detail: String },
}

impl Response {
    pub fn error(code: &str, detail: impl Into<String>) -> Self {
        Self::Error {
            code: code.to_string(),
            detail: detail.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Self::Error { .. })
    }
}

/// All live sessions.
#[derive(Debug)]
pub struct SessionManager {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    next_id: AtomicU64,
    idle_timeout: Duration,
    /// Defaults that `create` configs are layered over.
    base: serde_json::Value,
}

impl Default for SessionManager {
    fn default() -> Self {
        Self::new(DEFAULT_IDLE_TIMEOUT)
    }
}

fn merge(base: &mut serde_json::Value, patch: &serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k.clone()).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

impl SessionManager {
    pub fn new(idle_timeout: Duration) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            idle_timeout,
            base: serde_json::json!({}),
        }
    }

    /// Fields of `base` apply to every created session unless overridden.
    pub fn with_base_config(mut self, base: &RunConfig) -> Result<Self> {
        self.base = serde_json::to_value(base)?;
        Ok(self)
    }

    /// Creates a session paused at iteration 0. Live feedback is enabled.
    pub fn create(&self, config: &serde_json::Value) -> Result<String> {
        let mut merged = self.base.clone();
        merge(&mut merged, config);
        let mut cfg: RunConfig = serde_json::from_value(merged)?;
        cfg.dmil.live = true;
        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let session = Arc::new(Session::new(id.clone(), cfg)?);
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id.clone(), session);
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
    }

    pub fn remove(&self, id: &str) -> bool {
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .remove(id)
            .is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions untouched for longer than the idle timeout; returns how many.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let mut map = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        let before = map.len();
        map.retain(|_, s| now.saturating_duration_since(s.idle_since()) <= self.idle_timeout);
        before - map.len()
    }

    /// Advances every playing session whose pacing allows it.
    pub fn tick_playing(&self, now: Instant) -> usize {
        let sessions: Vec<Arc<Session>> = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .cloned()
            .collect();
        sessions
            .iter()
            .filter(|s| matches!(s.tick(now), Ok(true)))
            .count()
    }

    pub fn handle(&self, request: Request) -> Response {
        let session = |id: &str| {
            self.get(id)
                .ok_or_else(|| Response::error("no_such_session", format!("unknown session `{id}`")))
        };
        let state = |snap: Arc<StateSnapshot>| Response::State((*snap).clone());
        let result = match request {
            Request::Create { config } => match self.create(&config) {
                Ok(session) => Ok(Response::Created { session }),
                Err(e) => Err(Response::error("bad_config", e.to_string())),
            },
            Request::Advance { session: id, n } => session(&id).and_then(|s| {
                s.advance(n)
                    .map(state)
                    .map_err(|e| Response::error("engine_error", e.to_string()))
            }),
            Request::Feedback { session: id, message } => session(&id).and_then(|s| {
                s.submit_feedback(&message)
                    .map(Response::Ack)
                    .map_err(|e| Response::error("bad_weights", e.to_string()))
            }),
            Request::Snapshot { session: id } => session(&id).map(|s| state(s.snapshot())),
            Request::Play { session: id, rate } => session(&id).and_then(|s| {
                s.play(rate)
                    .map(state)
                    .map_err(|e| Response::error("bad_request", e.to_string()))
            }),
            Request::Pause { session: id } => session(&id).map(|s| state(s.pause())),
            Request::Close { session: id } => {
                if self.remove(&id) {
                    Ok(Response::Closed { session: id })
                } else {
                    Err(Response::error("no_such_session", format!("unknown session `{id}`")))
                }
            }
        };
        result.unwrap_or_else(|e| e)
    }

    /// Parses and answers one JSON message.
    pub fn handle_json(&self, text: &str) -> Response {
        match serde_json::from_str::<Request>(text) {
            Ok(req) => self.handle(req),
            Err(e) => {
                // a create whose config fails to parse is a config error, not a framing one
                let is_create = serde_json::from_str::<serde_json::Value>(text)
                    .ok()
                    .and_then(|v| v.get("type").and_then(|t| t.as_str()).map(|t| t == "create"))
                    .unwrap_or(false);
                let code = if is_create { "bad_config" } else { "bad_request" };
                Response::error(code, e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmil::{update_weights, EventStatus, ExpertScenario};
    use crate::engine::run_config;
    use serde_json::json;

    fn small_config() -> serde_json::Value {
        json!({"problem": "adas8", "population": 12, "iterations": 60, "archive": 20,
               "dmil": {"enabled": true, "tau": 25, "gamma": 0.3}})
    }

    fn created(mgr: &SessionManager, cfg: serde_json::Value) -> String {
        match mgr.handle(Request::Create { config: cfg }) {
            Response::Created { session } => session,
            other => panic!("{other:?}"),
        }
    }

    fn state(r: Response) -> StateSnapshot {
        match r {
            Response::State(s) => s,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn create_gives_paused_distinct_sessions() {
        let mgr = SessionManager::default();
        let a = created(&mgr, small_config());
        let b = created(&mgr, small_config());
        assert_ne!(a, b);
        let s = state(mgr.handle(Request::Snapshot { session: a.clone() }));
        assert_eq!(s.iteration, 0);
        assert_eq!(s.status, Status::Paused);
        assert_eq!(s.session, a);
        assert_eq!(s.c1, 2.0);
    }

    #[test]
    fn protocol_errors() {
        let mgr = SessionManager::default();
        let r = mgr.handle_json(r#"{"type":"create","config":{"population":"many"}}"#);
        assert!(matches!(&r, Response::Error { code, .. } if code == "bad_config"), "{r:?}");
        let r = mgr.handle_json(r#"{"type":"create","config":{"problem":"ZDT9"}}"#);
        assert!(matches!(&r, Response::Error { code, .. } if code == "bad_config"));
        let r = mgr.handle_json(r#"{"type":"advance","session":"nope","n":1}"#);
        assert!(matches!(&r, Response::Error { code, .. } if code == "no_such_session"));
        let r = mgr.handle_json("not json");
        assert!(matches!(&r, Response::Error { code, .. } if code == "bad_request"));
        let id = created(&mgr, small_config());
        let r = mgr.handle(Request::Feedback {
            session: id.clone(),
            message: FeedbackMessage {
                weights: vec![1.0, 1.0],
                gamma: None,
                submitted_at_iteration: None,
            },
        });
        assert!(matches!(&r, Response::Error { code, .. } if code == "bad_weights"));
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains(r#""type":"error""#) && text.contains(r#""code":"bad_weights""#));
    }

    #[test]
    fn wire_shapes() {
        let req: Request =
            serde_json::from_str(r#"{"type":"feedback","session":"s1","weights":[0.6,0.2,0.2]}"#).unwrap();
        assert!(matches!(req, Request::Feedback { ref message, .. } if message.weights == vec![0.6, 0.2, 0.2]));
        let mgr = SessionManager::default();
        let id = created(&mgr, small_config());
        let r = mgr.handle_json(&format!(r#"{{"type":"feedback","session":"{id}","weights":[2,1,1]}}"#));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["type"], "ack");
        assert_eq!(v["applies_at"], 25);
        assert_eq!(v["weights"], json!([0.5, 0.25, 0.25]));
        let r = mgr.handle_json(&format!(r#"{{"type":"advance","session":"{id}","n":3}}"#));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["type"], "state");
        assert_eq!(v["iteration"], 3);
        assert_eq!(v["status"], "paused");
    }

    #[test]
    fn queued_feedback_applies_once_at_boundary() {
        let mgr = SessionManager::default();
        let id = created(&mgr, small_config());
        let s = mgr.get(&id).unwrap();
        let ack = s
            .submit_feedback(&FeedbackMessage {
                weights: vec![0.6, 0.2, 0.2],
                gamma: None,
                submitted_at_iteration: None,
            })
            .unwrap();
        assert_eq!(ack.applies_at, Some(25));
        let mid = s.advance(24).unwrap();
        assert_eq!(mid.weights, vec![1.0 / 3.0; 3]);
        assert_eq!(mid.pending_feedback.as_deref(), Some(&[0.6, 0.2, 0.2][..]));
        let snap = s.advance(1).unwrap();
        let want = update_weights(&[1.0 / 3.0; 3], &[0.6, 0.2, 0.2], 0.3).unwrap();
        assert_eq!(snap.weights, want);
        assert_eq!(snap.last_event.as_ref().unwrap().status, EventStatus::Applied);
        assert!(snap.pending_feedback.is_none());
        // next boundary without a submission is skipped
        let snap = s.advance(25).unwrap();
        assert_eq!(snap.weights, want);
        assert_eq!(snap.last_event.as_ref().unwrap().status, EventStatus::Skipped);
    }

    #[test]
    fn last_write_wins() {
        let mgr = SessionManager::default();
        let id = created(&mgr, small_config());
        let s = mgr.get(&id).unwrap();
        let msg = |w: Vec<f64>| FeedbackMessage {
            weights: w,
            gamma: None,
            submitted_at_iteration: None,
        };
        assert!(!s.submit_feedback(&msg(vec![0.1, 0.1, 0.8])).unwrap().superseded);
        assert!(s.submit_feedback(&msg(vec![0.6, 0.2, 0.2])).unwrap().superseded);
        let log = s.superseded_log();
        assert_eq!(log.len(), 1);
        assert_eq!(log[0].weights, vec![0.1, 0.1, 0.8]);
        let snap = s.advance(25).unwrap();
        assert_eq!(
            snap.last_event.as_ref().unwrap().w_expert.as_deref(),
            Some(&[0.6, 0.2, 0.2][..])
        );
    }

    #[test]
    fn advance_clamps_and_finishes() {
        let mgr = SessionManager::default();
        let id = created(&mgr, small_config());
        let s = mgr.get(&id).unwrap();
        let before = s.advance(0).unwrap();
        assert_eq!(before.iteration, 0);
        let snap = s.advance(1000).unwrap();
        assert_eq!(snap.iteration, 60);
        assert_eq!(snap.status, Status::Finished);
        let ack = s
            .submit_feedback(&FeedbackMessage {
                weights: vec![1.0, 0.0, 0.0],
                gamma: None,
                submitted_at_iteration: None,
            })
            .unwrap();
        assert!(ack.no_effect);
        assert_eq!(ack.applies_at, None);
        assert_eq!(s.advance(5).unwrap().iteration, 60);
    }

    #[test]
    fn snapshots_are_monotone_and_nondominated() {
        let mgr = SessionManager::default();
        let id = created(&mgr, small_config());
        let s = mgr.get(&id).unwrap();
        let mut last = 0;
        for _ in 0..6 {
            let snap = s.advance(7).unwrap();
            assert!(snap.iteration >= last);
            last = snap.iteration;
            for a in &snap.front {
                for b in &snap.front {
                    assert!(!crate::types::dominates(&a.f, &b.f).unwrap());
                }
            }
        }
    }

    #[test]
    fn live_matches_headless_scenario() {
        let scenario = ExpertScenario::constant_from(2, vec![0.6, 0.2, 0.2], "safety").unwrap();
        let mut cfg: RunConfig = serde_json::from_value(small_config()).unwrap();
        cfg.dmil.tau = 10;
        cfg.seed = 77;
        let mut headless_cfg = cfg.clone();
        headless_cfg.dmil.scenario = Some(scenario.clone());
        let headless = run_config(headless_cfg).unwrap();

        let mgr = SessionManager::default();
        let id = mgr.create(&serde_json::to_value(&cfg).unwrap()).unwrap();
        let s = mgr.get(&id).unwrap();
        for event in 1..=6 {
            s.submit_feedback(&FeedbackMessage {
                weights: scenario.simulated_expert(event, 3),
                gamma: None,
                submitted_at_iteration: None,
            })
            .unwrap();
            s.advance(10).unwrap();
        }
        let live = s.record().unwrap();
        assert_eq!(live.final_front, headless.final_front);
        assert_eq!(live.events, headless.events);
    }

    #[test]
    fn play_ticks_and_eviction() {
        let mgr = SessionManager::new(Duration::from_secs(60));
        let id = created(&mgr, small_config());
        let s = mgr.get(&id).unwrap();
        assert_eq!(state(mgr.handle(Request::Play { session: id.clone(), rate: None })).status, Status::Running);
        let now = Instant::now();
        assert_eq!(mgr.tick_playing(now), 1);
        assert_eq!(mgr.tick_playing(now), 1);
        assert_eq!(s.snapshot().iteration, 2);
        assert_eq!(state(mgr.handle(Request::Pause { session: id.clone() })).status, Status::Paused);
        assert_eq!(mgr.tick_playing(now), 0);
        assert!(mgr.handle(Request::Play { session: id.clone(), rate: Some(-1.0) }).is_error());

        assert_eq!(mgr.evict_idle(Instant::now()), 0);
        assert_eq!(mgr.evict_idle(Instant::now() + Duration::from_secs(120)), 1);
        assert!(mgr.is_empty());
        assert!(mgr.handle(Request::Close { session: id }).is_error());
    }

    #[test]
    fn rate_limited_play() {
        let mgr = SessionManager::default();
        let id = created(&mgr, small_config());
        mgr.get(&id).unwrap().play(Some(2.0)).unwrap();
        let t0 = Instant::now();
        // half a second per iteration at 2 it/s
        assert_eq!(mgr.tick_playing(t0), 0);
        assert_eq!(mgr.tick_playing(t0 + Duration::from_millis(600)), 1);
        assert_eq!(mgr.tick_playing(t0 + Duration::from_millis(700)), 0);
    }

    #[test]
    fn base_config_layers_under_create() {
        let base = RunConfig {
            population: 8,
            iterations: 5,
            ..RunConfig::new("ZDT2")
        };
        let mgr = SessionManager::default().with_base_config(&base).unwrap();
        let id = mgr.create(&json!({"seed": 3})).unwrap();
        let rec = mgr.get(&id).unwrap().record().unwrap();
        assert_eq!(rec.config.problem, "ZDT2");
        assert_eq!(rec.config.population, 8);
        assert_eq!(rec.config.seed, 3);
        assert!(rec.config.dmil.live);
    }
}
