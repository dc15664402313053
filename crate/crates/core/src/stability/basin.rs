//! Zero-waste basins, radius and coradius.
//!
//! `B(s)` is the forward closure of `s` along zero-waste edges and `L(s)` its
//! part that can return to `s`. The radius and coradius are measured against
//! the attraction basin `D(s)`, the states with a zero-waste path *into* `s`:
//! escaping `D(s)` is what it takes to leave the pull of `s`, and entering
//! it is all it takes to get back for free. Measured this way the
//! radius-coradius test is sound: `R(s) > CR(s)` implies that the stable set
//! is `L(s)`. When `D(s)` is the whole space the radius is infinite and the
//! test holds vacuously.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use petgraph::graph::NodeIndex;
use petgraph::visit::{Dfs, IntoNeighbors, Reversed, Visitable};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{Game, StateId};
use crate::rational::{self, Rational};
use crate::revision::RevisionProcess;
use crate::stability::potential::{potentials_from_graph, zero_waste_digraph, StochasticPotentialTable};
use crate::stability::waste::WasteGraph;

/// A rational or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Extended {
    Finite(Rational),
    Infinite,
}

impl Extended {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Extended::Finite(r) => Some(r),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(r) => f.write_str(&rational::format(r)),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn closure<G>(g: G, start: StateId) -> BTreeSet<StateId>
where
    G: IntoNeighbors<NodeId = NodeIndex> + Visitable<NodeId = NodeIndex>,
{
    let mut dfs = Dfs::new(g, NodeIndex::new(start));
    let mut out = BTreeSet::new();
    while let Some(v) = dfs.next(g) {
        out.insert(v.index());
    }
    out
}

/// `B(s)`: every state reachable from `s` through zero-waste edges (including `s`).
pub fn zero_waste_closure(graph: &WasteGraph, s: StateId) -> BTreeSet<StateId> {
    closure(&zero_waste_digraph(graph), s)
}

/// `D(s)`: every state with a zero-waste path into `s` (including `s`).
pub fn attraction_basin(graph: &WasteGraph, s: StateId) -> BTreeSet<StateId> {
    closure(Reversed(&zero_waste_digraph(graph)), s)
}

/// `L(s)`: the states of `B(s)` that can return to `s` for free.
pub fn limit_set(graph: &WasteGraph, s: StateId) -> BTreeSet<StateId> {
    let back = attraction_basin(graph, s);
    zero_waste_closure(graph, s).intersection(&back).copied().collect()
}

/// Shortest waste distances from `source` (or into it when `reverse`).
fn shortest_paths(graph: &WasteGraph, source: StateId, reverse: bool) -> Vec<Option<Rational>> {
    let n = graph.n_states();
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut done = vec![false; n];
    dist[source] = Some(Rational::zero());
    loop {
        let next = (0..n)
            .filter(|&v| !done[v])
            .filter_map(|v| dist[v].as_ref().map(|d| (v, d)))
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(v, _)| v);
        let Some(v) = next else { break };
        done[v] = true;
        let dv = dist[v].clone().expect("settled state has a distance");
        for u in 0..n {
            if done[u] {
                continue;
            }
            let w = if reverse { graph.weight(u, v) } else { graph.weight(v, u) };
            if let Some(w) = w {
                let cand = &dv + w;
                if dist[u].as_ref().is_none_or(|d| cand < *d) {
                    dist[u] = Some(cand);
                }
            }
        }
    }
    dist
}

/// Minimum waste of a path from `s` to a state outside `D(s)`; infinite when
/// `D(s)` is everything or its complement cannot be reached.
pub fn radius(graph: &WasteGraph, s: StateId) -> Extended {
    let basin = attraction_basin(graph, s);
    shortest_paths(graph, s, false)
        .into_iter()
        .enumerate()
        .filter(|(v, _)| !basin.contains(v))
        .filter_map(|(_, d)| d)
        .min()
        .map_or(Extended::Infinite, Extended::Finite)
}

/// Largest, over states outside `D(s)`, of the cheapest path into `s`; zero
/// when there is no such state, infinite if one of them cannot reach `s`.
pub fn coradius(graph: &WasteGraph, s: StateId) -> Extended {
    let basin = attraction_basin(graph, s);
    let mut worst = Extended::Finite(Rational::zero());
    for (v, d) in shortest_paths(graph, s, true).into_iter().enumerate() {
        if basin.contains(&v) {
            continue;
        }
        let d = d.map_or(Extended::Infinite, Extended::Finite);
        worst = worst.max(d);
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct BasinReport {
    pub state: StateId,
    /// Zero-waste closure `B(s)`.
    pub basin: BTreeSet<StateId>,
    /// States with a zero-waste path into `s`.
    pub attraction: BTreeSet<StateId>,
    pub limit: BTreeSet<StateId>,
    pub radius: Extended,
    pub coradius: Extended,
}

impl BasinReport {
    pub fn new(graph: &WasteGraph, s: StateId) -> Self {
        Self {
            state: s,
            basin: zero_waste_closure(graph, s),
            attraction: attraction_basin(graph, s),
            limit: limit_set(graph, s),
            radius: radius(graph, s),
            coradius: coradius(graph, s),
        }
    }

    /// `R(s) - CR(s)` when both are finite.
    pub fn gap(&self) -> Option<Rational> {
        Some(self.radius.finite()? - self.coradius.finite()?)
    }

    pub fn radius_exceeds_coradius(&self) -> bool {
        self.radius > self.coradius
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", content = "stable", rename_all = "snake_case")]
pub enum RadiusCheck {
    Applicable(BTreeSet<StateId>),
    NotApplicable,
}

/// Applies the radius-coradius test at `s`. When it applies, the certified
/// set is compared against the minimizers in `table`, which must come from
/// the same graph; a disagreement is an error.
pub fn radius_coradius_check_graph(
    graph: &WasteGraph,
    table: &StochasticPotentialTable,
    s: StateId,
) -> Result<(RadiusCheck, BasinReport)> {
    let report = BasinReport::new(graph, s);
    if !report.radius_exceeds_coradius() {
        return Ok((RadiusCheck::NotApplicable, report));
    }
    if table.argmin != report.limit {
        return Err(Error::InternalInconsistency(format!(
            "radius-coradius test at state {s} certifies {:?} but the potential minimizers are {:?}",
            report.limit, table.argmin
        )));
    }
    Ok((RadiusCheck::Applicable(report.limit.clone()), report))
}

pub fn radius_coradius_check(game: &Game, revision: &RevisionProcess, s: StateId) -> Result<RadiusCheck> {
    let graph = WasteGraph::build(game, revision)?;
    let table = potentials_from_graph(&graph, revision.kind())?;
    radius_coradius_check_graph(&graph, &table, s).map(|(check, _)| check)
}
