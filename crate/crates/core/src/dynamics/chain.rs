//! The finite-β Markov chain of logit dynamics as a dense matrix.

use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::{Dfs, Reversed};
use rayon::prelude::*;

use crate::dynamics::logit::{ln_add, ln_sum, log_logit_choice};
use crate::dynamics::DynamicsConfig;
use crate::error::{Error, Result};
use crate::game::{Game, StateId};
use crate::rational;
use crate::revision::RevisionProcess;

/// Largest state space for which dense transition matrices are built.
pub const DENSE_CHAIN_CAP: usize = 2048;

/// Row-stochastic matrix; row = current state.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<f64>,
}

/// The same chain with every entry stored as its natural logarithm, so that
/// transitions far below `f64::MIN_POSITIVE` keep their magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct LogTransitionMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    /// Wraps an explicit matrix after checking that it is row-stochastic.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParams(format!("expected {} entries, found {}", n * n, data.len())));
        }
        if let Some(x) = data.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidParams(format!("transition probability {x} is not a probability")));
        }
        for (i, row) in data.chunks(n).enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParams(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { n, data })
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: StateId, to: StateId) -> f64 {
        self.data[from * self.n + to]
    }

    pub fn row(&self, from: StateId) -> &[f64] {
        &self.data[from * self.n..(from + 1) * self.n]
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        self.data.chunks(self.n.max(1)).map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `ReducibleChain` unless every state reaches every other through positive entries.
    pub fn check_irreducible(&self) -> Result<()> {
        check_irreducible(self.n, |i, j| self.get(i, j) > 0.0)
    }

    /// `‖μP - μ‖∞`.
    pub fn residual(&self, mu: &[f64]) -> f64 {
        (0..self.n)
            .map(|j| ((0..self.n).map(|i| mu[i] * self.get(i, j)).sum::<f64>() - mu[j]).abs())
            .fold(0.0, f64::max)
    }
}

impl LogTransitionMatrix {
    pub fn n_states(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: StateId, to: StateId) -> f64 {
        self.data[from * self.n + to]
    }

    pub fn check_irreducible(&self) -> Result<()> {
        check_irreducible(self.n, |i, j| self.get(i, j) > f64::NEG_INFINITY)
    }

    pub fn to_linear(&self) -> TransitionMatrix {
        TransitionMatrix { n: self.n, data: self.data.iter().map(|x| x.exp()).collect() }
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.data
    }
}

fn check_irreducible(n: usize, positive: impl Fn(usize, usize) -> bool) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let mut g = DiGraph::<(), ()>::with_capacity(n, n);
    for _ in 0..n {
        g.add_node(());
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i && positive(i, j)) {
            g.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
        }
    }
    let start = NodeIndex::new(0);
    let mut forward = vec![false; n];
    let mut dfs = Dfs::new(&g, start);
    while let Some(v) = dfs.next(&g) {
        forward[v.index()] = true;
    }
    let mut backward = vec![false; n];
    let rev = Reversed(&g);
    let mut dfs = Dfs::new(rev, start);
    while let Some(v) = dfs.next(rev) {
        backward[v.index()] = true;
    }
    match (0..n).find(|&v| !forward[v] || !backward[v]) {
        Some(v) => Err(Error::ReducibleChain(v)),
        None => Ok(()),
    }
}

/// `ln p_i(k | s_{-i})` for every state, player and strategy.
struct ChoiceTable {
    offsets: Vec<usize>,
    stride: usize,
    values: Vec<f64>,
}

impl ChoiceTable {
    fn new(game: &Game, beta: f64) -> Result<Self> {
        let mut offsets = Vec::new();
        let mut stride = 0;
        for (player, &c) in game.strategy_counts().iter().enumerate() {
            if c == 0 {
                return Err(Error::EmptyStrategySet { player });
            }
            offsets.push(stride);
            stride += c;
        }
        let rows: Vec<Vec<f64>> = (0..game.n_states())
            .into_par_iter()
            .map(|state| {
                (0..game.n_players())
                    .flat_map(|player| {
                        log_logit_choice(&game.utilities_against(state, player), beta).expect("nonempty strategy set")
                    })
                    .collect()
            })
            .collect();
        Ok(Self { offsets, stride, values: rows.concat() })
    }

    #[inline]
    fn get(&self, state: StateId, player: usize, strategy: usize) -> f64 {
        self.values[state * self.stride + self.offsets[player] + strategy]
    }
}

/// Log-domain transition matrix of logit dynamics under `config`.
pub fn log_transition_matrix(game: &Game, config: &DynamicsConfig) -> Result<LogTransitionMatrix> {
    let n = game.n_states();
    if n > DENSE_CHAIN_CAP {
        return Err(Error::StateSpaceTooLarge { size: n as u128, cap: DENSE_CHAIN_CAP as u64 });
    }
    let players = game.n_players();
    config.revision.validate(players)?;
    let choices = ChoiceTable::new(game, config.beta)?;
    let space = game.space();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|from| {
            let mut row = vec![f64::NEG_INFINITY; n];
            match &config.revision {
                RevisionProcess::Independent { p } => {
                    // each player independently: revise and pick k, or stay put
                    let lp = rational::to_f64(p).ln();
                    let lq = (1.0 - rational::to_f64(p)).ln();
                    let factors: Vec<Vec<f64>> = (0..players)
                        .map(|j| {
                            let current = space.strategy(from, j);
                            (0..space.counts()[j])
                                .map(|k| {
                                    let stay = if k == current { lq } else { f64::NEG_INFINITY };
                                    ln_add(lp + choices.get(from, j, k), stay)
                                })
                                .collect()
                        })
                        .collect();
                    for (to, entry) in row.iter_mut().enumerate() {
                        *entry = (0..players).map(|j| factors[j][space.strategy(to, j)]).sum();
                    }
                }
                RevisionProcess::Asynchronous => {
                    let pick = -(players as f64).ln();
                    let mut stay = Vec::with_capacity(players);
                    for i in 0..players {
                        let current = space.strategy(from, i);
                        for k in 0..space.counts()[i] {
                            let lp = pick + choices.get(from, i, k);
                            if k == current {
                                stay.push(lp);
                            } else {
                                row[space.with_strategy(from, i, k)] = lp;
                            }
                        }
                    }
                    row[from] = ln_sum(stay);
                }
                RevisionProcess::Custom(support) => {
                    for (mask, q) in support {
                        let lq = rational::to_f64(q).ln();
                        for (to, entry) in row.iter_mut().enumerate() {
                            if !space.deviation(from, to).is_subset_of(*mask) {
                                continue;
                            }
                            let l: f64 = (0..players)
                                .filter(|j| mask >> j & 1 == 1)
                                .map(|j| choices.get(from, j, space.strategy(to, j)))
                                .sum();
                            *entry = ln_add(*entry, lq + l);
                        }
                    }
                }
            }
            row
        })
        .collect();
    Ok(LogTransitionMatrix { n, data: rows.concat() })
}

/// Transition matrix of logit dynamics under `config`.
pub fn transition_matrix(game: &Game, config: &DynamicsConfig) -> Result<TransitionMatrix> {
    Ok(log_transition_matrix(game, config)?.to_linear())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::DEFAULT_STATE_CAP;
    use crate::rational::{int, ratio};
    use crate::zoo::{self, TRIANGLE_STATES};

    fn one_player_flat() -> Game {
        Game::from_tables("flat", vec![2], DEFAULT_STATE_CAP, vec![int(0), int(0)], vec![int(0), int(0)]).unwrap()
    }

    #[test]
    fn single_player_at_zero_beta() {
        let cfg = DynamicsConfig::new(0.0, RevisionProcess::independent_half()).unwrap();
        let p = transition_matrix(&one_player_flat(), &cfg).unwrap();
        assert!((p.get(0, 1) - 0.25).abs() < 1e-15);
        assert!((p.get(0, 0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_beta_independent_is_symmetric() {
        let g = zoo::make_lb_unit_instance(2, 2, DEFAULT_STATE_CAP).unwrap();
        let cfg = DynamicsConfig::new(0.0, RevisionProcess::independent(ratio(1, 3)).unwrap()).unwrap();
        let p = transition_matrix(&g, &cfg).unwrap();
        for i in 0..g.n_states() {
            for j in 0..g.n_states() {
                assert!((p.get(i, j) - p.get(j, i)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rows_are_stochastic() {
        let g = zoo::make_triangle(DEFAULT_STATE_CAP).unwrap();
        let custom = RevisionProcess::custom(vec![(0b01, ratio(1, 4)), (0b11, ratio(3, 4))]).unwrap();
        for q in [RevisionProcess::independent_half(), RevisionProcess::Asynchronous, custom] {
            let p = transition_matrix(&g, &DynamicsConfig::new(2.5, q).unwrap()).unwrap();
            assert!(p.row_sum_error() < 1e-12);
        }
    }

    #[test]
    fn asynchronous_never_moves_two_players() {
        let g = zoo::make_triangle(DEFAULT_STATE_CAP).unwrap();
        let p = transition_matrix(&g, &DynamicsConfig::new(1.0, RevisionProcess::Asynchronous).unwrap()).unwrap();
        let [s0, _, s2, _] = TRIANGLE_STATES;
        assert_eq!(p.get(s2, s0), 0.0);
        assert!(p.check_irreducible().is_ok());
    }

    #[test]
    fn closed_form_matches_subset_sum() {
        // independent revision written out as an explicit distribution over subsets
        let g = zoo::make_lb_unit_instance(2, 2, DEFAULT_STATE_CAP).unwrap();
        let p = ratio(1, 3);
        let n = g.n_players();
        let q = RevisionProcess::independent(p).unwrap();
        let support = (0..1u64 << n).map(|m| (m, q.probability(m, n))).collect();
        let custom = RevisionProcess::custom(support).unwrap();
        let a = transition_matrix(&g, &DynamicsConfig::new(1.5, q).unwrap()).unwrap();
        let b = transition_matrix(&g, &DynamicsConfig::new(1.5, custom).unwrap()).unwrap();
        for i in 0..g.n_states() {
            for j in 0..g.n_states() {
                assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reducible_chain_detected() {
        let p = TransitionMatrix::from_dense(2, vec![1.0, 0.0, 0.5, 0.5]).unwrap();
        assert!(matches!(p.check_irreducible(), Err(Error::ReducibleChain(1))));
        assert!(TransitionMatrix::from_dense(2, vec![0.7, 0.7, 0.5, 0.5]).is_err());
    }

    #[test]
    fn size_cap() {
        let g = zoo::make_lb_unit_instance(2, 7, DEFAULT_STATE_CAP).unwrap();
        let cfg = DynamicsConfig::new(1.0, RevisionProcess::Asynchronous).unwrap();
        assert!(matches!(log_transition_matrix(&g, &cfg), Err(Error::StateSpaceTooLarge { .. })));
    }
}
