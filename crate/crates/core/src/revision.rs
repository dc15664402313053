//! Revision processes: which subsets of players may revise in one step.
//!
//! Player subsets are bitmasks (`bit i` = player `i`).

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum RevisionProcess {
    /// One uniformly chosen player revises per step.
    Asynchronous,
    /// Every player revises independently with probability `p ∈ (0, 1)`.
    Independent { p: Rational },
    /// Explicit distribution over player subsets.
    Custom(Vec<(u64, Rational)>),
}

impl RevisionProcess {
    pub fn independent(p: Rational) -> Result<Self> {
        if p <= Rational::zero() || p >= Rational::one() {
            return Err(Error::InvalidParams(format!(
                "revision probability must lie in (0, 1), got {}",
                rational::format(&p)
            )));
        }
        Ok(RevisionProcess::Independent { p })
    }

    /// Independent learning with `p = 1/2`.
    pub fn independent_half() -> Self {
        RevisionProcess::Independent { p: rational::ratio(1, 2) }
    }

    pub fn custom(support: Vec<(u64, Rational)>) -> Result<Self> {
        if support.iter().any(|(_, q)| *q <= Rational::zero()) {
            return Err(Error::InvalidParams("custom revision probabilities must be positive".into()));
        }
        let total: Rational = support.iter().map(|(_, q)| q).sum();
        if !total.is_one() {
            return Err(Error::InvalidParams(format!(
                "custom revision probabilities sum to {}, not 1",
                rational::format(&total)
            )));
        }
        let mut masks: Vec<u64> = support.iter().map(|(m, _)| *m).collect();
        masks.sort_unstable();
        masks.dedup();
        if masks.len() != support.len() {
            return Err(Error::InvalidParams("custom revision lists a subset twice".into()));
        }
        Ok(RevisionProcess::Custom(support))
    }

    /// Checks that every subset refers to existing players.
    pub fn validate(&self, n_players: usize) -> Result<()> {
        if let RevisionProcess::Custom(support) = self {
            let all = full_mask(n_players);
            if let Some((mask, _)) = support.iter().find(|(m, _)| m & !all != 0) {
                return Err(Error::InvalidParams(format!(
                    "revision subset {mask:#b} names a player outside 0..{n_players}"
                )));
            }
        }
        Ok(())
    }

    /// `q(J)` for a subset `J` of `n_players` players.
    pub fn probability(&self, subset: u64, n_players: usize) -> Rational {
        match self {
            RevisionProcess::Asynchronous => {
                if subset.count_ones() == 1 {
                    rational::ratio(1, n_players as i64)
                } else {
                    Rational::zero()
                }
            }
            RevisionProcess::Independent { p } => {
                let k = subset.count_ones() as usize;
                let q = Rational::one() - p;
                pow(p, k) * pow(&q, n_players - k)
            }
            RevisionProcess::Custom(support) => {
                support.iter().find(|(m, _)| *m == subset).map(|(_, q)| q.clone()).unwrap_or_else(Rational::zero)
            }
        }
    }

    /// `q(J) > 0`.
    pub fn is_feasible(&self, subset: u64, n_players: usize) -> bool {
        match self {
            RevisionProcess::Asynchronous => subset.count_ones() == 1 && subset & !full_mask(n_players) == 0,
            RevisionProcess::Independent { .. } => subset & !full_mask(n_players) == 0,
            RevisionProcess::Custom(support) => support.iter().any(|(m, _)| *m == subset),
        }
    }

    /// Short machine-friendly name.
    pub fn kind(&self) -> &'static str {
        match self {
            RevisionProcess::Asynchronous => "asynchronous",
            RevisionProcess::Independent { .. } => "independent",
            RevisionProcess::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for RevisionProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RevisionProcess::Asynchronous => write!(f, "asynchronous"),
            RevisionProcess::Independent { p } => write!(f, "independent(p={})", rational::format(p)),
            RevisionProcess::Custom(support) => write!(f, "custom({} subsets)", support.len()),
        }
    }
}

pub fn full_mask(n_players: usize) -> u64 {
    if n_players >= 64 {
        u64::MAX
    } else {
        (1u64 << n_players) - 1
    }
}

fn pow(base: &Rational, exp: usize) -> Rational {
    (0..exp).fold(Rational::one(), |acc, _| acc * base)
}
