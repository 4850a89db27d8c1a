//! Constrained-path probabilities for lattice walks.
//!
//! A [`PathQuery`] describes an event about `S_0 = 0, S_1, ..., S_n`: per-index
//! bounds from a [`BarrierProfile`] and a [`TerminalCondition`] on `S_n`.
//! [`path_probability`] evaluates it by a forward DP over reachable states,
//! [`tilted_path_probability`] evaluates it again under the `λ*`-tilted law,
//! and [`path_probability_exact`] enumerates paths in rational arithmetic.

mod bounds;
mod dp;
mod oracle;
mod profile;
mod xfloat;

use thiserror::Error;

use crate::model::ModelError;

pub use bounds::{
    bahadur_rao_scale, ballot_asymptotic, chernoff_bound, chernoff_bound_at_star, BallotKind,
    DEFAULT_BALLOT_RANGE, DEFAULT_LOCAL_RANGE,
};
pub use dp::{
    path_probability, stay_nonnegative_masses, tilted_path_probability, PathProbability, WalkDp,
    UNDERFLOW_THRESHOLD,
};
pub use oracle::{path_probability_enumerated, path_probability_exact, ORACLE_MAX_HORIZON};
pub use profile::{
    integer_seventh_root, BarrierProfile, PathQuery, TerminalCondition, DEFAULT_STATE_CAP,
};
pub use xfloat::Probability;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("layer {layer} needs {states} states, above the cap of {cap}")]
    StateCapExceeded {
        states: usize,
        cap: usize,
        layer: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("terminal set is empty")]
    EmptyTerminalSet,
    #[error("horizon {0} is too large for the enumeration oracle")]
    TooLargeForOracle(usize),
    #[error("argument out of range: {0}")]
    Range(String),
}

impl PathError {
    /// Whether the error reflects invalid input rather than a resource limit.
    pub fn is_semantic(&self) -> bool {
        !matches!(self, PathError::StateCapExceeded { .. })
    }
}
