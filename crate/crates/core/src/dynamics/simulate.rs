//! Seeded trajectories of logit dynamics.

use std::collections::HashMap;
use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::logit::log_logit_choice;
use crate::dynamics::DynamicsConfig;
use crate::error::{Error, Result};
use crate::game::{Game, StateId};
use crate::rational;
use crate::revision::RevisionProcess;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Simulation {
    pub seed: u64,
    pub steps: u64,
    /// Visits per state, counting the state after each step.
    pub occupancy: Vec<u64>,
    pub final_state: StateId,
    /// Steps on which the profile changed.
    pub transitions: u64,
}

impl Simulation {
    pub fn frequencies(&self) -> Vec<f64> {
        self.occupancy.iter().map(|&c| c as f64 / self.steps as f64).collect()
    }

    /// Total-variation distance between the empirical occupancy and `target`.
    pub fn total_variation(&self, target: &[f64]) -> f64 {
        0.5 * self.frequencies().iter().zip(target).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Writes `state_id,count,frequency` rows for every visited state.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::SolveFailure(format!("csv output failed: {e}"));
        w.write_record(["state_id", "count", "frequency"]).map_err(io)?;
        for (id, &count) in self.occupancy.iter().enumerate().filter(|(_, c)| **c > 0) {
            let freq = count as f64 / self.steps as f64;
            w.write_record([id.to_string(), count.to_string(), freq.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::SolveFailure(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

enum SubsetSampler {
    OnePlayer(usize),
    EachWith(f64, usize),
    Listed(Vec<u64>, WeightedIndex<f64>),
}

impl SubsetSampler {
    fn new(revision: &RevisionProcess, players: usize) -> Result<Self> {
        Ok(match revision {
            RevisionProcess::Asynchronous => SubsetSampler::OnePlayer(players),
            RevisionProcess::Independent { p } => SubsetSampler::EachWith(rational::to_f64(p), players),
            RevisionProcess::Custom(support) => {
                let weights: Vec<f64> = support.iter().map(|(_, q)| rational::to_f64(q)).collect();
                let index = WeightedIndex::new(weights).map_err(|e| Error::InvalidParams(e.to_string()))?;
                SubsetSampler::Listed(support.iter().map(|(m, _)| *m).collect(), index)
            }
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            SubsetSampler::OnePlayer(n) => 1 << rng.gen_range(0..*n),
            SubsetSampler::EachWith(p, n) => (0..*n).filter(|_| rng.gen_bool(*p)).fold(0, |m, j| m | 1 << j),
            SubsetSampler::Listed(masks, index) => masks[index.sample(rng)],
        }
    }
}

/// Runs `steps` steps of logit dynamics from `start`. Every revising player
/// responds to the profile at the beginning of the step.
pub fn simulate_from(
    game: &Game,
    config: &DynamicsConfig,
    start: StateId,
    steps: u64,
    seed: u64,
) -> Result<Simulation> {
    if steps == 0 {
        return Err(Error::InvalidParams("simulation needs at least one step".into()));
    }
    if start >= game.n_states() {
        return Err(Error::InvalidParams(format!("start state {start} out of range")));
    }
    let players = game.n_players();
    config.revision.validate(players)?;
    let subsets = SubsetSampler::new(&config.revision, players)?;
    let space = game.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut choices: HashMap<(StateId, usize), WeightedIndex<f64>> = HashMap::new();
    let mut occupancy = vec![0u64; game.n_states()];
    let mut state = start;
    let mut transitions = 0;
    for _ in 0..steps {
        let revising = subsets.sample(&mut rng);
        let mut next = state;
        for j in (0..players).filter(|j| revising >> j & 1 == 1) {
            let dist = match choices.entry((state, j)) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    let probs: Vec<f64> = log_logit_choice(&game.utilities_against(state, j), config.beta)?
                        .into_iter()
                        .map(f64::exp)
                        .collect();
                    e.insert(WeightedIndex::new(probs).map_err(|e| Error::SolveFailure(e.to_string()))?)
                }
            };
            next = space.with_strategy(next, j, dist.sample(&mut rng));
        }
        if next != state {
            transitions += 1;
        }
        state = next;
        occupancy[state] += 1;
    }
    Ok(Simulation { seed, steps, occupancy, final_state: state, transitions })
}

/// [`simulate_from`] starting at state 0.
pub fn simulate(game: &Game, config: &DynamicsConfig, steps: u64, seed: u64) -> Result<Simulation> {
    simulate_from(game, config, 0, steps, seed)
}

/// Independent replicates seeded `seed, seed + 1, ...`, run in parallel.
pub fn simulate_replicates(
    game: &Game,
    config: &DynamicsConfig,
    steps: u64,
    seed: u64,
    replicates: usize,
) -> Result<Vec<Simulation>> {
    (0..replicates as u64).into_par_iter().map(|r| simulate(game, config, steps, seed.wrapping_add(r))).collect()
}
