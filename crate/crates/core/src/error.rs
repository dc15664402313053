use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building or analyzing games.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state space has {size} profiles, above the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("player {player} has more than {cap} simple paths to the terminal")]
    TooManyPaths { player: usize, cap: usize },

    #[error("player {player} at node `{node}` cannot reach the terminal")]
    DisconnectedPlayer { player: usize, node: String },

    #[error("game carries no potential function")]
    MissingPotential,

    #[error("player {player} has an empty strategy set")]
    EmptyStrategySet { player: usize },

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("could not read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("state {0} cannot reach the root through feasible transitions")]
    Unreachable(usize),

    #[error("graph with {0} states is too large for exhaustive enumeration")]
    TooLarge(usize),

    #[error("Markov chain is reducible (state {0} is not mutually reachable with state 0)")]
    ReducibleChain(usize),

    #[error("stationary solve failed: {0}")]
    SolveFailure(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
