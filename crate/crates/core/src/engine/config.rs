use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::archive::DEFAULT_CAPACITY;
use crate::dmil::{ExpertScenario, DEFAULT_GAMMA, DEFAULT_TAU};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// A fresh `U(0, 1)` draw per coordinate per leader update.
    #[default]
    UniformPerDimension,
}

/// Parameters of the superposition and entanglement leader operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantumParams {
    pub alpha_mode: AlphaMode,
    /// Entanglement amplitude.
    pub beta: f64,
    /// Standard deviation (radians) of the rotation angles.
    pub rot_sigma: f64,
    pub sign_flip: bool,
    pub enabled: bool,
}

impl Default for QuantumParams {
    fn default() -> Self {
        Self {
            alpha_mode: AlphaMode::UniformPerDimension,
            beta: 0.1,
            rot_sigma: PI / 12.0,
            sign_flip: true,
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Qihsi,
    /// Classical multi-objective salp swarm: no quantum operators.
    Mssa,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Qihsi => "qihsi",
            Self::Mssa => "mssa",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qihsi" => Ok(Self::Qihsi),
            "mssa" => Ok(Self::Mssa),
            other => Err(Error::Parse(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DmilConfig {
    pub enabled: bool,
    /// Feedback period in iterations.
    pub tau: usize,
    pub gamma: f64,
    /// Scripted expert used by headless runs.
    pub scenario: Option<ExpertScenario>,
    /// Feedback arrives from a live session instead of the scenario.
    pub live: bool,
}

impl Default for DmilConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            tau: DEFAULT_TAU,
            gamma: DEFAULT_GAMMA,
            scenario: None,
            live: false,
        }
    }
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub problem: String,
    pub algorithm: Algorithm,
    pub population: usize,
    pub iterations: usize,
    pub archive: usize,
    pub seed: u64,
    pub quantum: QuantumParams,
    pub dmil: DmilConfig,
    /// Size of the sampled true front used for IGD and PSP.
    pub reference_size: usize,
    /// Record IGD/HV after every iteration.
    pub trace_metrics: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "ZDT1".into(),
            algorithm: Algorithm::Qihsi,
            population: 100,
            iterations: 250,
            archive: DEFAULT_CAPACITY,
            seed: 42,
            quantum: QuantumParams::default(),
            dmil: DmilConfig::default(),
            reference_size: 1000,
            trace_metrics: true,
        }
    }
}

impl RunConfig {
    pub fn new(problem: impl Into<String>) -> Self {
        Self {
            problem: problem.into(),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    /// Checks ranges and applies implied settings (the MSSA tag disables the
    /// quantum operators).
    pub fn validated(mut self) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.population < 2 {
            return bad(format!("population must be >= 2, got {}", self.population));
        }
        if self.iterations < 1 {
            return bad("iterations must be >= 1".into());
        }
        if self.archive < 1 {
            return bad("archive capacity must be >= 1".into());
        }
        if !(self.quantum.beta >= 0.0) || !self.quantum.beta.is_finite() {
            return bad(format!("beta must be >= 0, got {}", self.quantum.beta));
        }
        if !(self.quantum.rot_sigma >= 0.0) || !self.quantum.rot_sigma.is_finite() {
            return bad(format!("rot_sigma must be >= 0, got {}", self.quantum.rot_sigma));
        }
        if self.dmil.tau < 1 {
            return bad("tau must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.dmil.gamma) {
            return bad(format!("gamma {} outside [0, 1]", self.dmil.gamma));
        }
        if self.reference_size < 2 {
            return bad("reference_size must be >= 2".into());
        }
        if let Some(s) = &self.dmil.scenario {
            s.validate()?;
        }
        if self.algorithm == Algorithm::Mssa {
            self.quantum.enabled = false;
        }
        Ok(self)
    }
}
