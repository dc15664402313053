//! Load balancing on identical machines.
//!
//! Each job is a player choosing a machine; her utility is minus the load of
//! that machine and the social cost is the makespan. `φ(s) = Σ_machines load²`
//! is a weighted potential with `w_i = 1 / (2 · weight_i)`: moving a job of
//! weight `w` from load `a` to load `b` changes `φ` by `2w(b + w - a)`, which is
//! `2w` times the change in the mover's cost.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{Game, Profile, StateId, WeightedPotential};
use crate::rational::{self, int, Rational};
use crate::zoo::GameSpec;

/// Machines plus one positive weight per job.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadBalancingSpec {
    pub machines: usize,
    pub job_weights: Vec<Rational>,
}

impl LoadBalancingSpec {
    pub fn new(machines: usize, job_weights: Vec<Rational>) -> Result<Self> {
        if machines == 0 {
            return Err(Error::InvalidParams("need at least one machine".into()));
        }
        if job_weights.is_empty() {
            return Err(Error::InvalidParams("need at least one job".into()));
        }
        if job_weights.iter().any(|w| *w <= Rational::zero()) {
            return Err(Error::InvalidParams("job weights must be positive".into()));
        }
        Ok(Self { machines, job_weights })
    }

    pub fn loads(&self, profile: &Profile) -> Vec<Rational> {
        let mut loads = vec![Rational::zero(); self.machines];
        for (job, &machine) in profile.0.iter().enumerate() {
            loads[machine] += &self.job_weights[job];
        }
        loads
    }

    pub fn build(&self, cap: u64) -> Result<Game> {
        let n = self.job_weights.len();
        let name = format!("load_balancing(m={}, n={n})", self.machines);
        let mut potential = Vec::new();
        let game = Game::from_fn(name, vec![self.machines; n], cap, |profile| {
            let loads = self.loads(profile);
            let utilities = profile.0.iter().map(|&m| -loads[m].clone()).collect();
            let makespan = loads.iter().max().cloned().unwrap_or_else(Rational::zero);
            potential.push(loads.iter().map(|l| l * l).sum());
            (utilities, makespan)
        })?;
        let weights = self.job_weights.iter().map(|w| (int(2) * w).recip()).collect();
        let labels = (0..n).map(|_| (0..self.machines).map(|m| format!("M{m}")).collect()).collect();
        Ok(game
            .with_potential(WeightedPotential { values: potential, weights })?
            .with_labels(labels)
            .with_spec(GameSpec::LoadBalancing { machines: self.machines, jobs: self.job_weights.clone() }))
    }

    /// Class signature: the multiset of per-machine weight multisets.
    ///
    /// Each machine's weights are sorted descending, and machines are sorted
    /// descending by that list with empty machines last, so states that differ
    /// only by relabeling machines or swapping equal-weight jobs share a signature.
    pub fn class_signature(&self, profile: &Profile) -> String {
        let mut machines: Vec<Vec<Rational>> = vec![Vec::new(); self.machines];
        for (job, &machine) in profile.0.iter().enumerate() {
            machines[machine].push(self.job_weights[job].clone());
        }
        for m in &mut machines {
            m.sort_by(|a, b| b.cmp(a));
        }
        machines.sort_by(|a, b| b.cmp(a));
        machines
            .iter()
            .map(|m| {
                let inner: Vec<String> = m.iter().map(rational::format).collect();
                format!("[{}]", inner.join(","))
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn check_ml(m: usize, l: usize) -> Result<()> {
    if m < 2 || l < 1 {
        return Err(Error::InvalidParams(format!("need m >= 2 and l >= 1, got m={m}, l={l}")));
    }
    Ok(())
}

/// `m` machines and `lm - 1` unit jobs.
pub fn lb_unit_spec(m: usize, l: usize) -> Result<LoadBalancingSpec> {
    check_ml(m, l)?;
    LoadBalancingSpec::new(m, vec![int(1); l * m - 1])
}

pub fn make_lb_unit_instance(m: usize, l: usize, cap: u64) -> Result<Game> {
    lb_unit_spec(m, l)?.build(cap)
}

/// `(Δ, δ)` with `Δ = m/(m+1)` and `δ = Δ/(lm)`.
pub fn lb_pos_parameters(m: usize, l: usize) -> (Rational, Rational) {
    let big = rational::ratio(m as i64, m as i64 + 1);
    let small = &big / int((l * m) as i64);
    (big, small)
}

/// Jobs `{Δ-δ, Δ-δ, Δ (m-2 copies), δ (lm copies)}`.
pub fn lb_pos_spec(m: usize, l: usize) -> Result<LoadBalancingSpec> {
    check_ml(m, l)?;
    let (big, small) = lb_pos_parameters(m, l);
    let mut jobs = vec![&big - &small, &big - &small];
    jobs.extend(std::iter::repeat_n(big.clone(), m - 2));
    jobs.extend(std::iter::repeat_n(small, l * m));
    LoadBalancingSpec::new(m, jobs)
}

pub fn make_lb_pos_instance(m: usize, l: usize, cap: u64) -> Result<Game> {
    lb_pos_spec(m, l)?.build(cap)
}

/// The profile of the near-optimal Nash class: both `Δ-δ` jobs on machine 0,
/// every `δ` job on machine 1, and one `Δ` job on each remaining machine.
pub fn lb_pos_apx_profile(m: usize, l: usize) -> Result<Profile> {
    check_ml(m, l)?;
    let mut assignment = vec![0, 0];
    assignment.extend(2..m);
    assignment.extend(std::iter::repeat_n(1, l * m));
    Ok(Profile(assignment))
}

/// The profile of the optimal class: one large job and `l` `δ` jobs per machine.
pub fn lb_pos_opt_profile(m: usize, l: usize) -> Result<Profile> {
    check_ml(m, l)?;
    let mut assignment: Vec<usize> = (0..m).collect();
    assignment.extend((0..m).flat_map(|k| std::iter::repeat_n(k, l)));
    Ok(Profile(assignment))
}

fn states_in_class(game: &Game, m: usize, l: usize, representative: &Profile) -> Result<Vec<StateId>> {
    let spec = lb_pos_spec(m, l)?;
    let target = spec.class_signature(representative);
    Ok(game
        .enumerate_states()
        .enumerate()
        .filter(|(_, p)| spec.class_signature(p) == target)
        .map(|(id, _)| id)
        .collect())
}

/// Every state of `game` whose class signature matches the near-optimal Nash class.
pub fn lb_pos_apx_states(game: &Game, m: usize, l: usize) -> Result<Vec<StateId>> {
    states_in_class(game, m, l, &lb_pos_apx_profile(m, l)?)
}

/// Every state of `game` in the optimal class.
pub fn lb_pos_opt_states(game: &Game, m: usize, l: usize) -> Result<Vec<StateId>> {
    states_in_class(game, m, l, &lb_pos_opt_profile(m, l)?)
}

/// Worst-case instance for the classical price of anarchy on `m` identical
/// machines: two jobs of weight `m` and `m(m-1)` unit jobs. Stacking both big
/// jobs on one machine with `m` unit jobs everywhere else is a Nash
/// equilibrium of makespan `2m`, while the optimum is `m + 1`.
pub fn lb_poa_witness_spec(m: usize) -> Result<LoadBalancingSpec> {
    if m < 2 {
        return Err(Error::InvalidParams(format!("need m >= 2, got {m}")));
    }
    let mut jobs = vec![int(m as i64), int(m as i64)];
    jobs.extend(std::iter::repeat_n(int(1), m * (m - 1)));
    LoadBalancingSpec::new(m, jobs)
}
