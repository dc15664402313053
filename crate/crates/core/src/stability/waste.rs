//! Waste of transitions and the waste graph.
//!
//! Moving from `s` to `s'` with revising set `J ⊇ {j : s_j ≠ s'_j}` wastes
//! `Σ_{j∈J} (max_k u_j(k, s_{-j}) - u_j(s'_j, s_{-j}))`, every term evaluated
//! against the old profile. The waste of the transition is the minimum over
//! feasible `J`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{Game, StateId};
use crate::rational::Rational;
use crate::revision::RevisionProcess;

/// Largest state space for which the dense waste graph is built.
pub const WASTE_GRAPH_CAP: usize = 2048;

/// Waste of a transition: a nonnegative rational, or infeasible when no
/// revising subset with positive probability can produce it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Waste {
    Feasible(Rational),
    Infeasible,
}

impl Waste {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            Waste::Feasible(w) => Some(w),
            Waste::Infeasible => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Waste::Feasible(w) if w.is_zero())
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Waste::Feasible(_))
    }
}

/// Best-response regret `max_k u_j(k, s_{-j}) - u_j(k', s_{-j})` for every
/// state, player and strategy `k'`.
#[derive(Clone, Debug)]
pub struct RegretTable {
    offsets: Vec<usize>,
    stride: usize,
    values: Vec<Rational>,
}

impl RegretTable {
    pub fn new(game: &Game) -> Self {
        let counts = game.strategy_counts();
        let mut offsets = Vec::with_capacity(counts.len());
        let mut stride = 0;
        for &c in counts {
            offsets.push(stride);
            stride += c;
        }
        let mut values = Vec::with_capacity(stride * game.n_states());
        for state in 0..game.n_states() {
            for player in 0..game.n_players() {
                let us = game.utilities_against(state, player);
                let best = us.iter().copied().max().expect("nonempty strategy set").clone();
                values.extend(us.into_iter().map(|u| &best - u));
            }
        }
        Self { offsets, stride, values }
    }

    #[inline]
    pub fn get(&self, state: StateId, player: usize, strategy: usize) -> &Rational {
        &self.values[state * self.stride + self.offsets[player] + strategy]
    }
}

/// `W^{(J)}_{s,s'}`, or `None` when `J` does not contain every player that moves.
pub fn subset_waste(game: &Game, regret: &RegretTable, from: StateId, to: StateId, subset: u64) -> Option<Rational> {
    let space = game.space();
    if !space.deviation(from, to).is_subset_of(subset) {
        return None;
    }
    Some(
        (0..game.n_players())
            .filter(|j| subset >> j & 1 == 1)
            .map(|j| regret.get(from, j, space.strategy(to, j)))
            .sum(),
    )
}

fn waste_with(game: &Game, regret: &RegretTable, revision: &RevisionProcess, from: StateId, to: StateId) -> Waste {
    let space = game.space();
    let moved = space.deviation(from, to);
    let cost_of = |mask: u64| -> Rational {
        (0..game.n_players()).filter(|j| mask >> j & 1 == 1).map(|j| regret.get(from, j, space.strategy(to, j))).sum()
    };
    match revision {
        RevisionProcess::Asynchronous => {
            if moved.len() == 1 {
                Waste::Feasible(cost_of(moved.0))
            } else {
                Waste::Infeasible
            }
        }
        // every extra reviser adds a nonnegative term, so J = moved players is optimal
        RevisionProcess::Independent { .. } => Waste::Feasible(cost_of(moved.0)),
        RevisionProcess::Custom(support) => support
            .iter()
            .filter(|(mask, _)| moved.is_subset_of(*mask))
            .map(|(mask, _)| cost_of(*mask))
            .min()
            .map_or(Waste::Infeasible, Waste::Feasible),
    }
}

/// Waste of the transition `from -> to` (`from != to`).
pub fn waste(game: &Game, revision: &RevisionProcess, from: StateId, to: StateId) -> Waste {
    waste_with(game, &RegretTable::new(game), revision, from, to)
}

/// All pairwise wastes over the state space; the diagonal is excluded.
#[derive(Clone, Debug)]
pub struct WasteGraph {
    n: usize,
    entries: Vec<Waste>,
}

impl WasteGraph {
    pub fn build(game: &Game, revision: &RevisionProcess) -> Result<Self> {
        let n = game.n_states();
        if n > WASTE_GRAPH_CAP {
            return Err(Error::StateSpaceTooLarge { size: n as u128, cap: WASTE_GRAPH_CAP as u64 });
        }
        revision.validate(game.n_players())?;
        let regret = RegretTable::new(game);
        let rows: Vec<Vec<Waste>> = (0..n)
            .into_par_iter()
            .map(|from| {
                (0..n)
                    .map(
                        |to| {
                            if from == to {
                                Waste::Infeasible
                            } else {
                                waste_with(game, &regret, revision, from, to)
                            }
                        },
                    )
                    .collect()
            })
            .collect();
        Ok(Self { n, entries: rows.into_iter().flatten().collect() })
    }

    /// A graph from explicit entries (row = source); diagonal entries are ignored.
    pub fn from_entries(n: usize, entries: Vec<Waste>) -> Self {
        assert_eq!(entries.len(), n * n, "waste matrix must be n x n");
        let mut entries = entries;
        for i in 0..n {
            entries[i * n + i] = Waste::Infeasible;
        }
        Self { n, entries }
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: StateId, to: StateId) -> &Waste {
        &self.entries[from * self.n + to]
    }

    #[inline]
    pub fn weight(&self, from: StateId, to: StateId) -> Option<&Rational> {
        self.get(from, to).value()
    }

    #[inline]
    pub fn is_zero(&self, from: StateId, to: StateId) -> bool {
        self.get(from, to).is_zero()
    }

    /// Scales every feasible waste by the common denominator. Returns the
    /// integer weights and the scale, or `None` if some weight does not fit
    /// comfortably in an `i128`.
    pub fn integer_weights(&self) -> Option<(Vec<Option<i128>>, BigInt)> {
        let mut scale = BigInt::one();
        for w in self.entries.iter().filter_map(Waste::value) {
            scale = scale.lcm(w.denom());
        }
        // totals are at most n times the largest weight
        let limit = i128::MAX / 4 / (self.n as i128).max(1);
        let mut out = Vec::with_capacity(self.entries.len());
        for entry in &self.entries {
            match entry.value() {
                None => out.push(None),
                Some(w) => {
                    let scaled = w.numer() * (&scale / w.denom());
                    let v = scaled.to_i128().filter(|v| v.abs() <= limit)?;
                    out.push(Some(v));
                }
            }
        }
        Some((out, scale))
    }
}

pub fn waste_graph(game: &Game, revision: &RevisionProcess) -> Result<WasteGraph> {
    WasteGraph::build(game, revision)
}
