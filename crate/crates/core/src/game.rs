//! Finite games with exact utilities.
//!
//! A [`Game`] tabulates every player's utility and the social cost over the
//! whole profile space, so all comparisons downstream are exact rational
//! comparisons. Profiles are packed into [`StateId`]s with a little-endian
//! mixed radix over the strategy counts: player 0 is the fastest-moving digit.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::zoo::GameSpec;

/// Packed index of a profile in `[0, Π|S_i|)`.
pub type StateId = usize;

/// Default limit on the number of profiles a game may have.
pub const DEFAULT_STATE_CAP: u64 = 1 << 20;

/// Environment variable that overrides [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "STABILITY_STATE_CAP";

/// The state cap in effect: `STABILITY_STATE_CAP` if set and valid, else the default.
pub fn state_cap() -> u64 {
    std::env::var(STATE_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_STATE_CAP)
}

/// One strategy index per player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile(pub Vec<usize>);

impl Profile {
    pub fn strategies(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// Set of players whose strategies differ between two profiles, as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct DeviationSet(pub u64);

impl DeviationSet {
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    /// `true` when every player in `self` is also in `other`.
    pub fn is_subset_of(self, other: u64) -> bool {
        self.0 & !other == 0
    }

    pub fn players(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }
}

/// Mixed-radix indexing of the profile space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    counts: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl StateSpace {
    pub fn new(counts: Vec<usize>, cap: u64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidParams("a game needs at least one player".into()));
        }
        if counts.len() > 64 {
            return Err(Error::InvalidParams(format!("{} players exceeds the supported maximum of 64", counts.len())));
        }
        if let Some(player) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyStrategySet { player });
        }
        let mut size: u128 = 1;
        let mut strides = Vec::with_capacity(counts.len());
        for &c in &counts {
            strides.push(size as usize);
            size = size.saturating_mul(c as u128);
            if size > cap as u128 {
                // keep multiplying only to report a meaningful size
                let total = counts.iter().fold(1u128, |a, &c| a.saturating_mul(c as u128));
                return Err(Error::StateSpaceTooLarge { size: total, cap });
            }
        }
        Ok(Self { counts, strides, size: size as usize })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_players(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn pack(&self, profile: &Profile) -> StateId {
        profile.0.iter().zip(&self.strides).map(|(s, w)| s * w).sum()
    }

    pub fn unpack(&self, id: StateId) -> Profile {
        Profile(self.counts.iter().zip(&self.strides).map(|(&c, &w)| id / w % c).collect())
    }

    #[inline]
    pub fn strategy(&self, id: StateId, player: usize) -> usize {
        id / self.strides[player] % self.counts[player]
    }

    /// The state reached from `id` when `player` switches to `strategy`.
    #[inline]
    pub fn with_strategy(&self, id: StateId, player: usize, strategy: usize) -> StateId {
        let current = self.strategy(id, player);
        id - current * self.strides[player] + strategy * self.strides[player]
    }

    pub fn deviation(&self, a: StateId, b: StateId) -> DeviationSet {
        let mut bits = 0u64;
        for player in 0..self.n_players() {
            if self.strategy(a, player) != self.strategy(b, player) {
                bits |= 1 << player;
            }
        }
        DeviationSet(bits)
    }

    pub fn is_valid(&self, profile: &Profile) -> bool {
        profile.0.len() == self.counts.len() && profile.0.iter().zip(&self.counts).all(|(s, c)| s < c)
    }

    /// All profiles in StateId order.
    pub fn iter(&self) -> impl Iterator<Item = Profile> + '_ {
        (0..self.size).map(move |id| self.unpack(id))
    }
}

/// A weighted potential: `u_i(s) - u_i(s') = (φ(s') - φ(s)) · w_i` for unilateral deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPotential {
    pub values: Vec<Rational>,
    pub weights: Vec<Rational>,
}

impl WeightedPotential {
    /// All weights equal, so the potential is exact up to rescaling.
    pub fn is_exact(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }
}

/// Outcome of [`Game::check_weighted_potential`].
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialCheck {
    Ok,
    Violation { profile: Profile, player: usize, deviation: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct NashSets {
    pub nash: BTreeSet<StateId>,
    pub strict_nash: BTreeSet<StateId>,
}

/// A finite normal-form game with tabulated rational utilities and social cost.
#[derive(Clone, Debug)]
pub struct Game {
    name: String,
    space: StateSpace,
    utilities: Vec<Rational>,
    costs: Vec<Rational>,
    potential: Option<WeightedPotential>,
    labels: Option<Vec<Vec<String>>>,
    spec: Option<GameSpec>,
}

impl Game {
    /// Tabulates a game from an oracle returning `(utilities, social cost)` per profile.
    pub fn from_fn<F>(name: impl Into<String>, counts: Vec<usize>, cap: u64, mut oracle: F) -> Result<Self>
    where
        F: FnMut(&Profile) -> (Vec<Rational>, Rational),
    {
        let space = StateSpace::new(counts, cap)?;
        let n = space.n_players();
        let mut utilities = Vec::with_capacity(space.size() * n);
        let mut costs = Vec::with_capacity(space.size());
        for profile in space.iter() {
            let (u, c) = oracle(&profile);
            if u.len() != n {
                return Err(Error::InvalidParams(format!(
                    "utility oracle returned {} values for {n} players",
                    u.len()
                )));
            }
            utilities.extend(u);
            costs.push(c);
        }
        Ok(Self { name: name.into(), space, utilities, costs, potential: None, labels: None, spec: None })
    }

    /// Builds a game from row-major tables: `utilities[state * n + player]`, `costs[state]`.
    pub fn from_tables(
        name: impl Into<String>,
        counts: Vec<usize>,
        cap: u64,
        utilities: Vec<Rational>,
        costs: Vec<Rational>,
    ) -> Result<Self> {
        let space = StateSpace::new(counts, cap)?;
        let n = space.n_players();
        if utilities.len() != space.size() * n {
            return Err(Error::Schema(format!(
                "expected {} utilities ({} states x {n} players), found {}",
                space.size() * n,
                space.size(),
                utilities.len()
            )));
        }
        if costs.len() != space.size() {
            return Err(Error::Schema(format!("expected {} social costs, found {}", space.size(), costs.len())));
        }
        Ok(Self { name: name.into(), space, utilities, costs, potential: None, labels: None, spec: None })
    }

    pub fn with_potential(mut self, potential: WeightedPotential) -> Result<Self> {
        if potential.values.len() != self.space.size() || potential.weights.len() != self.n_players() {
            return Err(Error::Schema("potential table has the wrong shape".into()));
        }
        if potential.weights.iter().any(|w| *w <= Rational::zero()) {
            return Err(Error::Schema("potential weights must be positive".into()));
        }
        self.potential = Some(potential);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub(crate) fn with_spec(mut self, spec: GameSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn n_players(&self) -> usize {
        self.space.n_players()
    }

    pub fn n_states(&self) -> usize {
        self.space.size()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        self.space.counts()
    }

    pub fn potential(&self) -> Option<&WeightedPotential> {
        self.potential.as_ref()
    }

    pub fn labels(&self) -> Option<&[Vec<String>]> {
        self.labels.as_deref()
    }

    /// The constructor description this game was built from, if any.
    pub fn spec(&self) -> Option<&GameSpec> {
        self.spec.as_ref()
    }

    pub fn enumerate_states(&self) -> impl Iterator<Item = Profile> + '_ {
        self.space.iter()
    }

    #[inline]
    pub fn utility(&self, player: usize, state: StateId) -> &Rational {
        &self.utilities[state * self.n_players() + player]
    }

    pub fn social_cost(&self, state: StateId) -> &Rational {
        &self.costs[state]
    }

    /// Human-readable profile, using strategy labels when present.
    pub fn describe(&self, state: StateId) -> String {
        match &self.labels {
            Some(labels) => {
                let parts: Vec<&str> =
                    (0..self.n_players()).map(|i| labels[i][self.space.strategy(state, i)].as_str()).collect();
                format!("({})", parts.join(","))
            }
            None => self.space.unpack(state).to_string(),
        }
    }

    /// `player`'s utility for each of her strategies against the others' strategies in `state`.
    pub fn utilities_against(&self, state: StateId, player: usize) -> Vec<&Rational> {
        (0..self.space.counts()[player])
            .map(|k| self.utility(player, self.space.with_strategy(state, player, k)))
            .collect()
    }

    /// `max_k u_player(k, s_{-player})`.
    pub fn best_response_value(&self, state: StateId, player: usize) -> Rational {
        self.utilities_against(state, player).into_iter().max().cloned().expect("strategy sets are nonempty")
    }

    /// The argmax set of `player`'s utility against `state`, in increasing strategy order.
    pub fn best_responses(&self, state: StateId, player: usize) -> Vec<usize> {
        let values = self.utilities_against(state, player);
        let best = values.iter().max().copied().expect("strategy sets are nonempty");
        values.iter().enumerate().filter(|(_, v)| **v == best).map(|(k, _)| k).collect()
    }

    pub fn is_nash(&self, state: StateId) -> bool {
        (0..self.n_players()).all(|i| self.best_responses(state, i).contains(&self.space.strategy(state, i)))
    }

    pub fn nash_set(&self) -> NashSets {
        let mut sets = NashSets::default();
        for state in 0..self.n_states() {
            let mut nash = true;
            let mut strict = true;
            for i in 0..self.n_players() {
                let br = self.best_responses(state, i);
                let current = self.space.strategy(state, i);
                if !br.contains(&current) {
                    nash = false;
                    break;
                }
                if br.len() > 1 {
                    strict = false;
                }
            }
            if nash {
                sets.nash.insert(state);
                if strict {
                    sets.strict_nash.insert(state);
                }
            }
        }
        sets
    }

    /// Verifies the weighted-potential identity over every unilateral deviation.
    pub fn check_weighted_potential(&self) -> Result<PotentialCheck> {
        let potential = self.potential.as_ref().ok_or(Error::MissingPotential)?;
        for state in 0..self.n_states() {
            for player in 0..self.n_players() {
                let current = self.space.strategy(state, player);
                for k in 0..self.space.counts()[player] {
                    if k == current {
                        continue;
                    }
                    let other = self.space.with_strategy(state, player, k);
                    let lhs = self.utility(player, state) - self.utility(player, other);
                    let rhs = (&potential.values[other] - &potential.values[state]) * &potential.weights[player];
                    if lhs != rhs {
                        return Ok(PotentialCheck::Violation {
                            profile: self.space.unpack(state),
                            player,
                            deviation: k,
                        });
                    }
                }
            }
        }
        Ok(PotentialCheck::Ok)
    }

    /// Minimum social cost and all profiles attaining it.
    pub fn optimum_cost(&self) -> (Rational, BTreeSet<StateId>) {
        argmin_set(&self.costs)
    }

    /// States minimizing the potential, if the game has one.
    pub fn potential_minimizers(&self) -> Option<BTreeSet<StateId>> {
        self.potential.as_ref().map(|p| argmin_set(&p.values).1)
    }
}

pub(crate) fn argmin_set(values: &[Rational]) -> (Rational, BTreeSet<StateId>) {
    let min = values.iter().min().cloned().unwrap_or_else(Rational::zero);
    let set = values.iter().enumerate().filter(|(_, v)| **v == min).map(|(i, _)| i).collect();
    (min, set)
}
