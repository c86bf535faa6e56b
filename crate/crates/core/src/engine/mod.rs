//! The optimizer: initialization, the per-iteration step and the run loop.

mod config;
mod operators;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use config::{AlphaMode, Algorithm, DmilConfig, QuantumParams, RunConfig};
pub use operators::{c1_schedule, entangle, follower_update, leader_update, superpose};

use crate::adas::{knee_point, AdasIndicators, AdasProblem};
use crate::archive::ParetoArchive;
use crate::dmil::{food_source_scores, DmilState, FeedbackEvent, FeedbackSource, NoFeedback};
use crate::error::{Error, Result};
use crate::metrics::{hypervolume, igd, MetricReport};
use crate::problems::{problem_by_id, Problem, ReferenceFront};
use crate::rng::{streams, RngStream};
use crate::types::{normalize_front, DecisionVector, ProblemSpec, Solution};

/// One independent random stream per consumer, so that switching an operator
/// off never shifts the draws seen by the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineRngs {
    pub init: RngStream,
    pub roulette: RngStream,
    pub alpha: RngStream,
    pub rotation: RngStream,
    pub sign: RngStream,
    pub classic: RngStream,
}

impl EngineRngs {
    pub fn new(seed: u64) -> Self {
        Self {
            init: RngStream::new(seed, streams::INIT),
            roulette: RngStream::new(seed, streams::ROULETTE),
            alpha: RngStream::new(seed, streams::ALPHA),
            rotation: RngStream::new(seed, streams::ROTATION),
            sign: RngStream::new(seed, streams::SIGN),
            classic: RngStream::new(seed, streams::CLASSIC),
        }
    }
}

/// Everything that evolves during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    /// The salp chain; leaders first.
    pub population: Vec<Solution>,
    pub archive: ParetoArchive,
    /// Completed iterations.
    pub iteration: usize,
    pub max_iterations: usize,
    pub dmil: DmilState,
    pub rngs: EngineRngs,
    /// Normalized knee objective vectors sampled at each feedback boundary.
    pub knee_history: Vec<Vec<f64>>,
}

impl SwarmState {
    pub fn n_leaders(&self) -> usize {
        self.population.len().div_ceil(2)
    }
}

/// Per-iteration traces. IGD and HV are empty when metric tracing is off;
/// IGD is also empty without a reference front.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    pub igd: Vec<f64>,
    pub hv: Vec<f64>,
    pub archive_size: Vec<usize>,
    pub c1: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub iteration: usize,
    pub c1: f64,
    /// Archive indices chosen as food sources, one per leader.
    pub food_sources: Vec<usize>,
    pub event: Option<FeedbackEvent>,
}

/// Result of a complete run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub problem: ProblemSpec,
    pub traces: Traces,
    pub final_front: Vec<Solution>,
    pub metrics: MetricReport,
    pub events: Vec<FeedbackEvent>,
    pub final_weights: Vec<f64>,
    pub knee_history: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adas_indicators: Option<AdasIndicators>,
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    /// Copy with wall-clock fields zeroed, for bitwise comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_clock_seconds: 0.0,
            ..self.clone()
        }
    }

    pub fn objective_front(&self) -> Vec<Vec<f64>> {
        self.final_front.iter().map(|s| s.f.to_vec()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A stepping optimizer bound to one problem and config.
pub struct Optimizer {
    config: RunConfig,
    problem: Arc<dyn Problem>,
    reference: Option<ReferenceFront>,
    ref_point: Vec<f64>,
    state: SwarmState,
    traces: Traces,
    last_c1: Option<f64>,
    elapsed: Duration,
}

impl std::fmt::Debug for Optimizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Optimizer")
            .field("problem", &self.problem.spec().id)
            .field("iteration", &self.state.iteration)
            .finish_non_exhaustive()
    }
}

impl Optimizer {
    /// Validates the config against the problem, then samples, evaluates and
    /// archives the initial population.
    pub fn new(config: RunConfig, problem: Arc<dyn Problem>) -> Result<Self> {
        let started = Instant::now();
        let config = config.validated()?;
        let spec = problem.spec().clone();
        if !config.problem.eq_ignore_ascii_case(&spec.id) {
            return Err(Error::InvalidParameter(format!(
                "config names problem `{}` but `{}` was supplied",
                config.problem, spec.id
            )));
        }
        if let Some(m) = config.dmil.scenario.as_ref().and_then(|s| s.objectives()) {
            if m != spec.objectives {
                return Err(Error::DimensionMismatch {
                    expected: spec.objectives,
                    found: m,
                });
            }
        }
        let reference = problem.reference_front(config.reference_size)?;
        let ref_point = problem
            .hv_reference_point()
            .or_else(|| reference.as_ref().and_then(|r| r.hv_reference_point()))
            .ok_or_else(|| {
                Error::Unsupported(format!("no hypervolume reference point for `{}`", spec.id))
            })?;

        let mut rngs = EngineRngs::new(config.seed);
        let bounds = &spec.bounds;
        let mut population = Vec::with_capacity(config.population);
        for _ in 0..config.population {
            let x: Vec<f64> = (0..spec.dimension)
                .map(|j| bounds.lower()[j] + bounds.range(j) * rngs.init.random::<f64>())
                .collect();
            let f = problem.evaluate(&x)?;
            population.push(Solution::new(DecisionVector::new(x)?, f));
        }
        let mut archive = ParetoArchive::new(config.archive)?;
        for s in &population {
            archive.insert(s.clone())?;
        }
        let dmil = DmilState::new(spec.objectives, config.dmil.gamma, config.dmil.tau)?;
        let state = SwarmState {
            population,
            archive,
            iteration: 0,
            max_iterations: config.iterations,
            dmil,
            rngs,
            knee_history: Vec::new(),
        };
        Ok(Self {
            config,
            problem,
            reference,
            ref_point,
            state,
            traces: Traces::default(),
            last_c1: None,
            elapsed: started.elapsed(),
        })
    }

    /// Resolves the problem by the config's id.
    pub fn from_config(config: RunConfig) -> Result<Self> {
        let problem = problem_by_id(&config.problem)?;
        Self::new(config, problem)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn problem(&self) -> &dyn Problem {
        self.problem.as_ref()
    }

    pub fn state(&self) -> &SwarmState {
        &self.state
    }

    pub fn traces(&self) -> &Traces {
        &self.traces
    }

    pub fn reference_front(&self) -> Option<&ReferenceFront> {
        self.reference.as_ref()
    }

    pub fn hv_reference_point(&self) -> &[f64] {
        &self.ref_point
    }

    /// Coefficient used by the most recent step.
    pub fn last_c1(&self) -> Option<f64> {
        self.last_c1
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.state.max_iterations
    }

    /// Roulette weights for the current archive.
    fn scores(&self) -> Result<Vec<f64>> {
        if self.config.dmil.enabled {
            food_source_scores(&self.state.archive, self.state.dmil.weights())
        } else {
            Ok(self.state.archive.crowding().to_vec())
        }
    }

    /// One iteration: leader moves, follower chain, evaluation, archive update
    /// and, when the iteration closes a feedback period, the feedback event.
    pub fn step(&mut self, feedback: &mut dyn FeedbackSource) -> Result<StepInfo> {
        let started = Instant::now();
        let t = self.state.iteration;
        let big_t = self.state.max_iterations;
        if t >= big_t {
            return Err(Error::BudgetExhausted(big_t));
        }
        let c1 = c1_schedule(t, big_t)?;
        let scores = self.scores()?;
        let bounds = self.problem.spec().bounds.clone();
        let dim = bounds.dim();
        let quantum = self.config.quantum.clone();
        let n = self.state.population.len();
        let n_leaders = self.state.n_leaders();

        let st = &mut self.state;
        let mut positions: Vec<DecisionVector> = Vec::with_capacity(n);
        let mut food_sources = Vec::with_capacity(n_leaders);
        for i in 0..n_leaders {
            let idx = st.archive.roulette_select(&scores, &mut st.rngs.roulette)?;
            food_sources.push(idx);
            let food = &st.archive.members()[idx].x;
            let own = &st.population[i].x;
            let x = if quantum.enabled {
                let mut q = Vec::with_capacity(dim);
                for j in 0..dim {
                    let alpha: f64 = st.rngs.alpha.random();
                    let blend = superpose(bounds.to_unit(j, food[j]), bounds.to_unit(j, own[j]), alpha)?;
                    let phi = quantum.rot_sigma * st.rngs.rotation.sample::<f64, _>(StandardNormal);
                    let theta = quantum.rot_sigma * st.rngs.rotation.sample::<f64, _>(StandardNormal);
                    q.push(entangle(blend, phi, theta, quantum.beta).clamp(0.0, 1.0));
                }
                leader_update(food, &q, c1, &bounds, &mut st.rngs.sign, quantum.sign_flip)?
            } else {
                let c2: Vec<f64> = (0..dim).map(|_| st.rngs.classic.random::<f64>()).collect();
                leader_update(food, &c2, c1, &bounds, &mut st.rngs.sign, true)?
            };
            positions.push(x);
        }
        for i in n_leaders..n {
            let x = follower_update(&st.population[i].x, &positions[i - 1])?;
            positions.push(x);
        }

        for (slot, x) in st.population.iter_mut().zip(positions) {
            let f = self.problem.evaluate(&x)?;
            *slot = Solution::new(x, f);
        }
        for s in &st.population {
            st.archive.insert(s.clone())?;
        }

        let k = t + 1;
        let mut event = None;
        if st.dmil.is_boundary(k) {
            if self.config.dmil.enabled {
                event = Some(st.dmil.feedback_event(k, feedback).clone());
            }
            let members = st.archive.members();
            let knee = knee_point(members, st.dmil.weights())?;
            let normalized = normalize_front(&members.iter().map(|s| s.f.as_slice()).collect::<Vec<_>>())?;
            st.knee_history.push(normalized[knee].clone());
        }
        st.iteration = k;
        self.last_c1 = Some(c1);

        self.traces.c1.push(c1);
        self.traces.archive_size.push(st.archive.len());
        self.traces.weights.push(st.dmil.weights().to_vec());
        if self.config.trace_metrics {
            let front = st.archive.front();
            if let Some(r) = &self.reference {
                self.traces.igd.push(igd(&front, &r.points)?);
            }
            self.traces.hv.push(hypervolume(&front, &self.ref_point)?);
        }
        self.elapsed += started.elapsed();
        Ok(StepInfo {
            iteration: k,
            c1,
            food_sources,
            event,
        })
    }

    /// Steps until the budget is spent.
    pub fn run_to_end(&mut self, feedback: &mut dyn FeedbackSource) -> Result<()> {
        while !self.is_finished() {
            self.step(feedback)?;
        }
        Ok(())
    }

    /// Final metrics and indicators for the current archive.
    pub fn record(&self) -> Result<RunRecord> {
        let st = &self.state;
        let final_front = st.archive.members().to_vec();
        let objectives = st.archive.front();
        let metrics = MetricReport::compute(&objectives, self.reference.as_ref(), &self.ref_point)?;
        let adas_indicators = if self.problem.spec().id == AdasProblem::ID {
            let w_expert = st
                .dmil
                .last_expert()
                .map(<[f64]>::to_vec)
                .or_else(|| {
                    self.config
                        .dmil
                        .scenario
                        .as_ref()
                        .and_then(|s| s.schedule.last())
                        .map(|e| e.weights.clone())
                })
                .unwrap_or_else(|| st.dmil.weights().to_vec());
            Some(AdasIndicators::compute(
                &final_front,
                st.dmil.weights(),
                &w_expert,
                &st.knee_history,
            )?)
        } else {
            None
        };
        Ok(RunRecord {
            config: self.config.clone(),
            problem: self.problem.spec().clone(),
            traces: self.traces.clone(),
            final_front,
            metrics,
            events: st.dmil.event_log().to_vec(),
            final_weights: st.dmil.weights().to_vec(),
            knee_history: st.knee_history.clone(),
            adas_indicators,
            wall_clock_seconds: self.elapsed.as_secs_f64(),
        })
    }
}

/// Runs `config` on `problem` to completion. Feedback comes from the config's
/// scenario when DMiL is on.
pub fn run(config: RunConfig, problem: Arc<dyn Problem>) -> Result<RunRecord> {
    let mut scenario = config.dmil.scenario.clone();
    let mut none = NoFeedback;
    let source: &mut dyn FeedbackSource = match scenario.as_mut() {
        Some(s) => s,
        None => &mut none,
    };
    run_with_feedback(config, problem, source)
}

pub fn run_with_feedback(
    config: RunConfig,
    problem: Arc<dyn Problem>,
    feedback: &mut dyn FeedbackSource,
) -> Result<RunRecord> {
    let mut opt = Optimizer::new(config, problem)?;
    opt.run_to_end(feedback)?;
    opt.record()
}

/// [`run`] with the problem resolved from the config's id.
pub fn run_config(config: RunConfig) -> Result<RunRecord> {
    let problem = problem_by_id(&config.problem)?;
    run(config, problem)
}
