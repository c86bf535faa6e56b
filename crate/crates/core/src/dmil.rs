//! Decision-maker-in-the-loop: objective weights blended toward expert
//! preferences at fixed iteration periods, and the preference-aware
//! food-source scores they induce.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::archive::ParetoArchive;
use crate::error::{ensure_len, Error, Result};
use crate::types::normalize_front;

/// Keeps preference scores finite when a member's weighted objective is zero.
pub const SCORE_EPSILON: f64 = 1e-6;
pub const DEFAULT_TAU: usize = 25;
pub const DEFAULT_GAMMA: f64 = 0.3;

const SIMPLEX_TOL: f64 = 1e-9;

pub fn uniform_weights(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

fn check_simplex(w: &[f64], what: &str) -> Result<()> {
    if w.is_empty() || w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} must be non-empty, finite and non-negative"
        )));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParameter(format!("{what} sum to {sum}, not 1")));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("gamma {gamma} outside [0, 1]")))
    }
}

/// Projects non-negative raw weights onto the simplex.
pub fn normalize_weights(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidParameter("weights must not all be zero".into()));
    }
    Ok(raw.iter().map(|v| v / sum).collect())
}

/// `(1 - gamma) * w + gamma * w_expert`, renormalized onto the simplex.
pub fn update_weights(w: &[f64], w_expert: &[f64], gamma: f64) -> Result<Vec<f64>> {
    ensure_len(w.len(), w_expert.len())?;
    check_gamma(gamma)?;
    check_simplex(w, "weights")?;
    check_simplex(w_expert, "expert weights")?;
    if gamma == 0.0 {
        return Ok(w.to_vec());
    }
    if gamma == 1.0 {
        return Ok(w_expert.to_vec());
    }
    let blended: Vec<f64> = w
        .iter()
        .zip(w_expert)
        .map(|(a, e)| (1.0 - gamma) * a + gamma * e)
        .collect();
    let sum: f64 = blended.iter().sum();
    Ok(blended.into_iter().map(|v| v / sum).collect())
}

/// Roulette weights for leader food sources: crowding distance divided by the
/// member's weighted normalized objective.
pub fn food_source_scores(archive: &ParetoArchive, w: &[f64]) -> Result<Vec<f64>> {
    if archive.is_empty() {
        return Err(Error::Empty("archive"));
    }
    let objs: Vec<&[f64]> = archive.members().iter().map(|s| s.f.as_slice()).collect();
    ensure_len(objs[0].len(), w.len())?;
    let norm = normalize_front(&objs)?;
    Ok(norm
        .iter()
        .zip(archive.crowding())
        .map(|(f, cd)| {
            let weighted: f64 = w.iter().zip(f).map(|(a, b)| a * b).sum();
            cd / (SCORE_EPSILON + weighted)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub event: usize,
    pub weights: Vec<f64>,
}

/// A scripted expert: preference vectors keyed by feedback-event index (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertScenario {
    pub schedule: Vec<ScheduleEntry>,
    #[serde(default)]
    pub description: String,
}

impl ExpertScenario {
    pub fn new(schedule: Vec<ScheduleEntry>, description: impl Into<String>) -> Result<Self> {
        let s = Self {
            schedule,
            description: description.into(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Expert weights from `event` onward.
    pub fn constant_from(event: usize, weights: Vec<f64>, description: impl Into<String>) -> Result<Self> {
        Self::new(vec![ScheduleEntry { event, weights }], description)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.schedule.iter().enumerate() {
            check_simplex(&e.weights, "scenario weights")?;
            if i > 0 {
                ensure_len(self.schedule[0].weights.len(), e.weights.len())?;
                if e.event <= self.schedule[i - 1].event {
                    return Err(Error::InvalidParameter(
                        "scenario event indices must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn objectives(&self) -> Option<usize> {
        self.schedule.first().map(|e| e.weights.len())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// The latest entry at or before `event_index`; uniform before the first.
    pub fn simulated_expert(&self, event_index: usize, m: usize) -> Vec<f64> {
        self.schedule
            .iter()
            .take_while(|e| e.event <= event_index)
            .last()
            .map_or_else(|| uniform_weights(m), |e| e.weights.clone())
    }
}

/// Expert input for one feedback event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub weights: Vec<f64>,
    /// Overrides the configured gain for this event only.
    #[serde(default)]
    pub gamma: Option<f64>,
}

/// Where feedback comes from when a period boundary is reached.
pub trait FeedbackSource {
    /// Feedback for the `event_index`-th boundary (1-based), reached at `iteration`.
    /// `None` skips the event.
    fn feedback(&mut self, event_index: usize, iteration: usize, m: usize) -> Option<Feedback>;
}

/// Never provides feedback.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoFeedback;

impl FeedbackSource for NoFeedback {
    fn feedback(&mut self, _: usize, _: usize, _: usize) -> Option<Feedback> {
        None
    }
}

impl FeedbackSource for ExpertScenario {
    fn feedback(&mut self, event_index: usize, _: usize, m: usize) -> Option<Feedback> {
        Some(Feedback {
            weights: self.simulated_expert(event_index, m),
            gamma: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventStatus {
    Applied,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub iteration: usize,
    pub event_index: usize,
    pub status: EventStatus,
    pub w_expert: Option<Vec<f64>>,
    pub gamma: f64,
    /// Weights after the event.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmilState {
    weights: Vec<f64>,
    gamma: f64,
    tau: usize,
    event_log: Vec<FeedbackEvent>,
}

impl DmilState {
    /// Uniform initial weights over `m` objectives.
    pub fn new(m: usize, gamma: f64, tau: usize) -> Result<Self> {
        check_gamma(gamma)?;
        if tau == 0 {
            return Err(Error::InvalidParameter("tau must be >= 1".into()));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("need at least one objective".into()));
        }
        Ok(Self {
            weights: uniform_weights(m),
            gamma,
            tau,
            event_log: Vec::new(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn event_log(&self) -> &[FeedbackEvent] {
        &self.event_log
    }

    /// True when `iteration` (1-based) closes a feedback period.
    pub fn is_boundary(&self, iteration: usize) -> bool {
        iteration > 0 && iteration % self.tau == 0
    }

    /// The expert weights most recently applied, if any.
    pub fn last_expert(&self) -> Option<&[f64]> {
        self.event_log
            .iter()
            .rev()
            .find_map(|e| e.w_expert.as_deref())
    }

    /// Runs one feedback event. Missing or invalid feedback is logged as skipped.
    pub fn feedback_event(
        &mut self,
        iteration: usize,
        source: &mut dyn FeedbackSource,
    ) -> &FeedbackEvent {
        let event_index = iteration / self.tau;
        let m = self.weights.len();
        let feedback = source.feedback(event_index, iteration, m);
        let applied = feedback.as_ref().and_then(|fb| {
            let gamma = fb.gamma.unwrap_or(self.gamma);
            update_weights(&self.weights, &fb.weights, gamma)
                .ok()
                .map(|w| (w, fb.weights.clone(), gamma))
        });
        let event = match applied {
            Some((w, expert, gamma)) => {
                self.weights = w;
                FeedbackEvent {
                    iteration,
                    event_index,
                    status: EventStatus::Applied,
                    w_expert: Some(expert),
                    gamma,
                    weights: self.weights.clone(),
                }
            }
            None => FeedbackEvent {
                iteration,
                event_index,
                status: EventStatus::Skipped,
                w_expert: None,
                gamma: self.gamma,
                weights: self.weights.clone(),
            },
        };
        self.event_log.push(event);
        self.event_log.last().expect("just pushed")
    }
}
