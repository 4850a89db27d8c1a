//! Monte Carlo generation of killed branching random walks.
//!
//! Every node draws `B` children and each child moves by an independent step.
//! A node whose position is strictly negative is killed together with its
//! whole subtree; the root at 0 is always living. Trials are indexed, and
//! trial `i` draws from the stream `(master seed, i)`.

mod levels;
mod rng;
mod runner;
mod sampler;
mod tree;

use thiserror::Error;

use crate::model::ModelError;
use crate::pathlaw::PathError;

pub use levels::{level_mean_exact, level_means};
pub use rng::{position, RngContract, TrialRng};
pub use runner::{Runner, TrialSummary, DEFAULT_CHUNK};
pub use tree::{Limits, MaxOutcome, PruneConfig, Simulator, SpineTrial, TrialRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid limits: {0}")]
    BadLimits(String),
    #[error("frontier budget exceeded (partial maximum {}, bias bound {:.3e})", partial.m_all, partial.bias_bound)]
    BudgetExceeded { partial: MaxOutcome },
    #[error("off-spine exploration exceeded its budget of {0} nodes")]
    OffSpineBudget(u64),
    #[error("{0}")]
    NotWellControlled(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Runs `trials` killed trees with the given master seed, in trial order.
pub fn simulate_trials(
    sim: &Simulator,
    runner: &Runner,
    seed: u64,
    trials: std::ops::Range<u64>,
    mut consume: impl FnMut(TrialRecord),
) {
    runner.for_each_chunk(
        trials,
        |range| {
            range
                .map(|i| sim.simulate_killed_tree(i, &mut RngContract::new(seed, i).generator()))
                .collect::<Vec<_>>()
        },
        |records| records.into_iter().for_each(&mut consume),
    );
}
