//! Price of anarchy and stability, classical and under logit dynamics.
//!
//! Each ratio compares the worst (PoA) or best (PoS) social cost over a set
//! of states with the optimum. The set is the Nash equilibria for the
//! classical ratios, the potential minimizers for the logit ratios, and the
//! stochastically stable states of independent learning for the
//! independent-logit ratios.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use num_traits::Zero;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{Game, StateId};
use crate::rational::{self, Rational};
use crate::revision::RevisionProcess;
use crate::stability::basin::radius_coradius_check_graph;
use crate::stability::potential::potentials_from_graph;
use crate::stability::{stochastic_potentials, Extended, RadiusCheck, WasteGraph};
use crate::zoo::{self, GameSpec, ParallelLinksSpec};

/// Fractional digits in the decimal renderings.
pub const DECIMAL_DIGITS: usize = 6;

/// A cost ratio, or a marker when the optimum is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ratio {
    Finite(Rational),
    ZeroOptimum,
}

impl Ratio {
    fn of(cost: &Rational, optimum: &Rational) -> Self {
        if optimum.is_zero() {
            Ratio::ZeroOptimum
        } else {
            Ratio::Finite(cost / optimum)
        }
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            Ratio::Finite(r) => Some(r),
            Ratio::ZeroOptimum => None,
        }
    }

    pub fn decimal(&self) -> String {
        match self {
            Ratio::Finite(r) => rational::decimal(r, DECIMAL_DIGITS),
            Ratio::ZeroOptimum => self.to_string(),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => f.write_str(&rational::format(r)),
            Ratio::ZeroOptimum => f.write_str("zero-optimum"),
        }
    }
}

/// Worst and best cost over `states` relative to `optimum`.
fn ratios(game: &Game, states: &BTreeSet<StateId>, optimum: &Rational) -> Option<(Ratio, Ratio)> {
    let costs = states.iter().map(|&s| game.social_cost(s));
    let worst = costs.clone().max()?;
    let best = costs.min()?;
    Some((Ratio::of(worst, optimum), Ratio::of(best, optimum)))
}

#[derive(Clone, Debug)]
pub struct MetricReport {
    pub game: String,
    pub n_states: usize,
    pub optimum: Rational,
    pub optimal_states: BTreeSet<StateId>,
    pub poa: Option<Ratio>,
    pub pos: Option<Ratio>,
    pub logit_poa: Option<Ratio>,
    pub logit_pos: Option<Ratio>,
    pub ind_logit_poa: Ratio,
    pub ind_logit_pos: Ratio,
    pub nash: BTreeSet<StateId>,
    pub strict_nash: BTreeSet<StateId>,
    pub potential_minimizers: Option<BTreeSet<StateId>>,
    pub stable_independent: BTreeSet<StateId>,
    pub stable_asynchronous: BTreeSet<StateId>,
    pub contains_non_nash_stable: bool,
    /// Stochastic potential of every state under independent learning.
    pub w_independent: Vec<Rational>,
    /// Stochastic potential of every state under asynchronous revision.
    pub w_asynchronous: Vec<Rational>,
}

impl MetricReport {
    /// The ordering facts every report must satisfy; returns the first violation.
    pub fn check_invariants(&self) -> Result<()> {
        let one = Ratio::Finite(rational::int(1));
        let le = |a: &Ratio, b: &Ratio| match (a.value(), b.value()) {
            (Some(x), Some(y)) => x <= y,
            _ => true,
        };
        let mut pairs: Vec<(&str, &Ratio, &Ratio)> =
            vec![("ind_logit_pos <= ind_logit_poa", &self.ind_logit_pos, &self.ind_logit_poa)];
        if let (Some(pos), Some(poa)) = (&self.pos, &self.poa) {
            pairs.push(("pos <= poa", pos, poa));
            pairs.push(("ind_logit_pos <= poa", &self.ind_logit_pos, poa));
        }
        if let (Some(pos), Some(poa)) = (&self.logit_pos, &self.logit_poa) {
            pairs.push(("logit_pos <= logit_poa", pos, poa));
        }
        for (name, a, b) in pairs {
            if !le(a, b) {
                return Err(Error::InternalInconsistency(format!("{name} fails: {a} > {b}")));
            }
        }
        for r in [&self.poa, &self.pos, &self.logit_poa, &self.logit_pos].into_iter().flatten() {
            if !le(&one, r) {
                return Err(Error::InternalInconsistency(format!("ratio {r} below 1")));
            }
        }
        if self.stable_independent.is_disjoint(&self.nash) {
            return Err(Error::InternalInconsistency("no Nash equilibrium is stochastically stable".into()));
        }
        Ok(())
    }
}

impl Serialize for MetricReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("game", &self.game)?;
        map.serialize_entry("n_states", &self.n_states)?;
        map.serialize_entry("optimum", &rational::format(&self.optimum))?;
        map.serialize_entry("optimal_states", &self.optimal_states)?;
        let metrics: [(&str, Option<&Ratio>); 6] = [
            ("poa", self.poa.as_ref()),
            ("pos", self.pos.as_ref()),
            ("logit_poa", self.logit_poa.as_ref()),
            ("logit_pos", self.logit_pos.as_ref()),
            ("ind_logit_poa", Some(&self.ind_logit_poa)),
            ("ind_logit_pos", Some(&self.ind_logit_pos)),
        ];
        for (name, value) in metrics {
            map.serialize_entry(name, &value.map(Ratio::to_string))?;
            map.serialize_entry(&format!("approx_{name}"), &value.map(Ratio::decimal))?;
        }
        map.serialize_entry("nash", &self.nash)?;
        map.serialize_entry("strict_nash", &self.strict_nash)?;
        map.serialize_entry("potential_minimizers", &self.potential_minimizers)?;
        map.serialize_entry("stable_independent", &self.stable_independent)?;
        map.serialize_entry("stable_asynchronous", &self.stable_asynchronous)?;
        map.serialize_entry("contains_non_nash_stable", &self.contains_non_nash_stable)?;
        map.end()
    }
}

/// All six ratios, with independent learning at `p = 1/2`.
pub fn metric_report(game: &Game) -> Result<MetricReport> {
    metric_report_with(game, &RevisionProcess::independent_half())
}

/// All six ratios, using `independent` for the independent-logit ones.
pub fn metric_report_with(game: &Game, independent: &RevisionProcess) -> Result<MetricReport> {
    let (optimum, optimal_states) = game.optimum_cost();
    let nash = game.nash_set();
    let ind = stochastic_potentials(game, independent)?;
    let asy = stochastic_potentials(game, &RevisionProcess::Asynchronous)?;
    let potential_minimizers = game.potential_minimizers();
    let (poa, pos) = ratios(game, &nash.nash, &optimum).unzip();
    let (logit_poa, logit_pos) = potential_minimizers.as_ref().and_then(|set| ratios(game, set, &optimum)).unzip();
    let (ind_logit_poa, ind_logit_pos) = ratios(game, &ind.argmin, &optimum).expect("the stable set is never empty");
    let contains_non_nash_stable = !ind.argmin.is_subset(&nash.nash);
    Ok(MetricReport {
        game: game.name().to_string(),
        n_states: game.n_states(),
        optimum,
        optimal_states,
        poa,
        pos,
        logit_poa,
        logit_pos,
        ind_logit_poa,
        ind_logit_pos,
        nash: nash.nash,
        strict_nash: nash.strict_nash,
        potential_minimizers,
        stable_independent: ind.argmin,
        stable_asynchronous: asy.argmin,
        contains_non_nash_stable,
        w_independent: ind.potentials,
        w_asynchronous: asy.potentials,
    })
}

/// Canonical class of a state: load multisets, link occupancy, or the
/// labelled profile.
pub fn class_of(game: &Game, state: StateId) -> String {
    match game.spec() {
        Some(spec @ (GameSpec::LoadBalancing { .. } | GameSpec::ParallelLinks { .. })) => {
            spec.class_signature(&game.space().unpack(state))
        }
        _ => game.describe(state),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StateRecord {
    pub state_id: StateId,
    pub profile: String,
    pub class: String,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
    #[serde(rename = "W_indep", with = "rational::serde_str")]
    pub w_indep: Rational,
    #[serde(rename = "W_async", with = "rational::serde_str")]
    pub w_async: Rational,
    pub is_nash: bool,
    #[serde(with = "rational::serde_opt")]
    pub phi: Option<Rational>,
}

pub fn classify_states(game: &Game, report: &MetricReport) -> Vec<StateRecord> {
    (0..game.n_states())
        .map(|s| StateRecord {
            state_id: s,
            profile: game.describe(s),
            class: class_of(game, s),
            cost: game.social_cost(s).clone(),
            w_indep: report.w_independent[s].clone(),
            w_async: report.w_asynchronous[s].clone(),
            is_nash: report.nash.contains(&s),
            phi: game.potential().map(|p| p.values[s].clone()),
        })
        .collect()
}

/// CSV with columns `state_id,class,cost,W_indep,W_async,is_nash,phi`.
pub fn write_states_csv<W: Write>(records: &[StateRecord], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::SolveFailure(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["state_id", "class", "cost", "W_indep", "W_async", "is_nash", "phi"]).map_err(io)?;
    for r in records {
        w.write_record([
            r.state_id.to_string(),
            r.class.clone(),
            rational::format(&r.cost),
            rational::format(&r.w_indep),
            rational::format(&r.w_async),
            r.is_nash.to_string(),
            r.phi.as_ref().map(rational::format).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::SolveFailure(format!("csv output failed: {e}")))?;
    Ok(())
}

/// A computed value next to the value it is compared with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub computed: String,
    pub expected: String,
    pub matches: bool,
}

impl Comparison {
    fn new(computed: &Ratio, expected: &Rational) -> Self {
        Self {
            computed: computed.to_string(),
            expected: rational::format(expected),
            matches: computed.value() == Some(expected),
        }
    }
}

/// Load-balancing bounds checked at a fixed number of machines `m` and
/// job multiplicity `l`.
#[derive(Clone, Debug, Serialize)]
pub struct Table1Check {
    pub m: usize,
    pub l: usize,
    /// Unit jobs: independent-logit PoA against `m - 1/l`.
    pub unit_ind_logit_poa: Comparison,
    /// PoS instance: independent-logit PoS against `cost(APX)/optimum`, the
    /// value reached when exactly the APX states are stable.
    pub pos_ind_logit_pos: Comparison,
    /// The limit `2(1 - 1/(m+1))` approached as `l` grows.
    pub pos_limit: String,
    pub pos_apx_uniquely_stable: bool,
    /// Classical PoA of the two-big-jobs instance against `2(1 - 1/(m+1))`.
    pub classical_poa: Comparison,
}

/// `2(1 - 1/(m+1))`.
pub fn load_balancing_bound(m: usize) -> Rational {
    rational::ratio(2 * m as i64, m as i64 + 1)
}

pub fn table1_check(m: usize, l: usize) -> Result<Table1Check> {
    let cap = crate::game::state_cap();
    let unit = metric_report(&zoo::make_lb_unit_instance(m, l, cap)?)?;
    let unit_expected = rational::int(m as i64) - rational::ratio(1, l as i64);

    let pos_game = zoo::make_lb_pos_instance(m, l, cap)?;
    let pos = metric_report(&pos_game)?;
    let apx: BTreeSet<StateId> = zoo::lb_pos_apx_states(&pos_game, m, l)?.into_iter().collect();
    let apx_cost = pos_game.social_cost(*apx.first().expect("APX class is nonempty"));
    let apx_ratio = apx_cost / &pos.optimum;

    let witness = zoo::lb_poa_witness_spec(m)?.build(cap)?;
    let (opt, _) = witness.optimum_cost();
    let worst_nash = witness
        .nash_set()
        .nash
        .iter()
        .map(|&s| witness.social_cost(s).clone())
        .max()
        .ok_or_else(|| Error::InternalInconsistency("witness instance has no Nash equilibrium".into()))?;

    Ok(Table1Check {
        m,
        l,
        unit_ind_logit_poa: Comparison::new(&unit.ind_logit_poa, &unit_expected),
        pos_ind_logit_pos: Comparison::new(&pos.ind_logit_pos, &apx_ratio),
        pos_limit: rational::format(&load_balancing_bound(m)),
        pos_apx_uniquely_stable: pos.stable_independent == apx,
        classical_poa: Comparison::new(&Ratio::of(&worst_nash, &opt), &load_balancing_bound(m)),
    })
}

/// Radius-coradius diagnostics at `N₁` (everyone on the cheapest link).
#[derive(Clone, Debug, Serialize)]
pub struct ParallelLinksReport {
    pub n_players: usize,
    pub link_costs: Vec<String>,
    pub state: StateId,
    pub radius: Extended,
    pub coradius: Extended,
    pub gap: Option<String>,
    /// `(ℓ₂ - ℓ₁)·H(n)`, a lower bound on the gap.
    pub gap_bound: Option<String>,
    pub switch_threshold: Option<usize>,
    pub check: RadiusCheck,
}

pub fn parallel_links_report(spec: &ParallelLinksSpec, revision: &RevisionProcess) -> Result<ParallelLinksReport> {
    let game = spec.build(crate::game::state_cap())?;
    let graph = WasteGraph::build(&game, revision)?;
    let table = potentials_from_graph(&graph, revision.kind())?;
    let n1 = spec.all_on(0);
    let (check, basin) = radius_coradius_check_graph(&graph, &table, n1)?;
    let gap_bound = spec
        .link_costs
        .get(1)
        .map(|l2| rational::format(&((l2 - &spec.link_costs[0]) * rational::harmonic(spec.n_players))));
    Ok(ParallelLinksReport {
        n_players: spec.n_players,
        link_costs: spec.link_costs.iter().map(rational::format).collect(),
        state: n1,
        gap: basin.gap().map(|g| rational::format(&g)),
        radius: basin.radius,
        coradius: basin.coradius,
        gap_bound,
        switch_threshold: spec.switch_threshold(),
        check,
    })
}
