//! Logit dynamics at finite β: choice rule, Markov chain, stationary
//! distribution and simulation.

pub mod chain;
pub mod logit;
pub mod simulate;
pub mod stationary;

pub use chain::{log_transition_matrix, transition_matrix, LogTransitionMatrix, TransitionMatrix, DENSE_CHAIN_CAP};
pub use logit::logit_choice;
pub use simulate::{simulate, simulate_from, simulate_replicates, Simulation};
pub use stationary::{
    log_stationary_distribution, numeric_stable_estimate, stationary_distribution, EstimateOptions, StableEstimate,
    StationaryDistribution,
};

use crate::error::{Error, Result};
use crate::revision::RevisionProcess;

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsConfig {
    /// Inverse noise level.
    pub beta: f64,
    pub revision: RevisionProcess,
}

impl DynamicsConfig {
    pub fn new(beta: f64, revision: RevisionProcess) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParams(format!("β must be finite and nonnegative, got {beta}")));
        }
        Ok(Self { beta, revision })
    }
}
