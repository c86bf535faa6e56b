//! Quantum-inspired salp swarm multi-objective optimization with periodic
//! decision-maker feedback, plus benchmarks, quality metrics and an
//! interactive session layer.

pub mod adas;
pub mod archive;
pub mod dmil;
pub mod engine;
pub mod error;
pub mod frontio;
pub mod harness;
pub mod metrics;
pub mod problems;
pub mod rng;
pub mod session;
pub mod types;

pub use archive::{InsertOutcome, ParetoArchive};
pub use dmil::{DmilState, ExpertScenario, Feedback, FeedbackEvent, FeedbackSource, NoFeedback};
pub use engine::{run, run_config, Algorithm, Optimizer, QuantumParams, RunConfig, RunRecord};
pub use error::{Error, Result};
pub use harness::{compare, run_batch, BatchReport, Comparison};
pub use problems::{problem_by_id, BenchmarkId, Problem, ReferenceFront};
pub use rng::RngStream;
pub use session::{Request, Response, SessionManager, StateSnapshot};
pub use types::{dominates, Bounds, DecisionVector, ObjectiveVector, ProblemSpec, Solution};
