//! Desk-scale experiments: the `E Z` series, the tails of `Z` and `M`, the
//! running mean of `Z log Z`, and where the maximum is first reached.
//!
//! Simulation-backed experiments run through an [`Experiment`], which fixes
//! the simulator, the worker pool, and the master seed. Trial `i` always draws
//! from stream `(seed, i)`, so every table is a function of the seed alone.

mod moments;
mod profile;
mod series;
pub mod stats;
mod tails;

use thiserror::Error;

use crate::engine::{simulate_trials, EngineError, Runner, Simulator, TrialRecord};
use crate::model::ModelError;
use crate::pathlaw::PathError;

pub use moments::{strictly_increasing, z_mean, zlogz_trend, MeanBracket, TrendRow};
pub use profile::{in_window, max_profile, MaxProfile, ProfileCell, WindowRow};
pub use series::{ez_series, fit_exponent, SeriesReport, TAIL_EXPONENT};
pub use tails::{
    m_tail, z_compensator, z_tail, MCounter, TailRow, TailTable, TailTarget, ZCounter,
    MIN_TAIL_TRIALS, POWER_HITS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("the series diverges: f(λ*) - log E B = {0:.3e} < 0")]
    SupercriticalDivergence(f64),
    #[error("threshold {threshold} exceeds max_nodes {max_nodes}, where Z is censored")]
    ThresholdBeyondCensoring { threshold: u64, max_nodes: u64 },
    #[error("P(M >= {k_max}) <= {reachable:.3e} is below the {required:.3e} needed for power")]
    Power {
        k_max: u64,
        reachable: f64,
        required: f64,
    },
    #[error("{trials} trials, at least {min} needed")]
    TooFewTrials { trials: u64, min: u64 },
    #[error("{0}")]
    BadSchedule(String),
    #[error("{0}")]
    NotWellControlled(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl LabError {
    /// Whether the error reflects invalid input rather than a resource limit.
    pub fn is_semantic(&self) -> bool {
        match self {
            LabError::Path(e) => e.is_semantic(),
            LabError::Engine(EngineError::ThreadPool(_)) => false,
            _ => true,
        }
    }
}

/// A simulator, a worker pool, and a master seed.
pub struct Experiment {
    pub simulator: Simulator,
    pub runner: Runner,
    pub seed: u64,
}

impl Experiment {
    pub fn new(simulator: Simulator, runner: Runner, seed: u64) -> Self {
        Experiment {
            simulator,
            runner,
            seed,
        }
    }

    /// Runs trials `0..trials` and hands the records over in trial order.
    pub fn for_each_trial(&self, trials: u64, consume: impl FnMut(TrialRecord)) {
        simulate_trials(&self.simulator, &self.runner, self.seed, 0..trials, consume);
    }
}
