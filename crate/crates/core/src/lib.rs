//! Exact stochastic-stability analysis for logit-response dynamics on finite games.

pub mod dynamics;
pub mod error;
pub mod game;
pub mod metrics;
pub mod rational;
pub mod revision;
pub mod stability;
pub mod zoo;

pub use error::{Error, Result};
pub use game::{Game, Profile, StateId};
pub use rational::Rational;

/// Guide chapters, compiled as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/games.md")]
    mod games {}
    #[doc = include_str!("../../../book/src/waste.md")]
    mod waste {}
    #[doc = include_str!("../../../book/src/basins.md")]
    mod basins {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
