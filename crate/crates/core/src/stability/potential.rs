//! Stochastic potentials and the stochastically stable set.
//!
//! `W(s)` is the minimum waste of a spanning tree directed into `s`; the
//! stochastically stable states are exactly its minimizers. `W` is constant
//! on every set of states that reach each other through zero-waste paths
//! (prepending such a path to a tree never adds waste), and merging such a
//! component into a single node does not change the optimum, so the trees
//! are computed on the condensed graph and expanded afterwards.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::kosaraju_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{argmin_set, Game, StateId};
use crate::rational::{self, Rational};
use crate::revision::RevisionProcess;
use crate::stability::arborescence::{Arborescence, ArborescenceSolver};
use crate::stability::waste::{Waste, WasteGraph};

#[derive(Clone, Debug, Serialize)]
pub struct StochasticPotentialTable {
    pub revision: String,
    #[serde(serialize_with = "serialize_state_map")]
    pub potentials: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub minimum: Rational,
    /// The stochastically stable states.
    pub argmin: BTreeSet<StateId>,
    /// Optimal trees for one representative per zero-waste component.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub witnesses: BTreeMap<StateId, Arborescence>,
}

impl StochasticPotentialTable {
    pub fn potential(&self, state: StateId) -> &Rational {
        &self.potentials[state]
    }

    pub fn is_stable(&self, state: StateId) -> bool {
        self.argmin.contains(&state)
    }

    fn from_potentials(
        revision: String,
        potentials: Vec<Rational>,
        witnesses: BTreeMap<StateId, Arborescence>,
    ) -> Self {
        let (minimum, argmin) = argmin_set(&potentials);
        Self { revision, potentials, minimum, argmin, witnesses }
    }
}

fn serialize_state_map<S: serde::Serializer>(values: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(values.len()))?;
    for (id, v) in values.iter().enumerate() {
        map.serialize_entry(&id.to_string(), &rational::format(v))?;
    }
    map.end()
}

/// The zero-waste edges as a graph; node indices are state ids.
pub(crate) fn zero_waste_digraph(graph: &WasteGraph) -> DiGraph<(), ()> {
    let n = graph.n_states();
    let mut g = DiGraph::with_capacity(n, n);
    for _ in 0..n {
        g.add_node(());
    }
    for v in 0..n {
        for u in (0..n).filter(|&u| u != v && graph.is_zero(v, u)) {
            g.add_edge(NodeIndex::new(v), NodeIndex::new(u), ());
        }
    }
    g
}

/// Component index of every state in the zero-waste graph.
fn zero_waste_components(graph: &WasteGraph) -> Vec<usize> {
    let mut comp = vec![0; graph.n_states()];
    for (c, members) in kosaraju_scc(&zero_waste_digraph(graph)).into_iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    comp
}

/// The waste graph with each zero-waste strongly connected component merged
/// into one node; an edge between components keeps the cheapest original edge.
struct Condensed {
    comp: Vec<usize>,
    graph: WasteGraph,
    origin: Vec<(StateId, StateId)>,
}

impl Condensed {
    fn new(graph: &WasteGraph) -> Self {
        let n = graph.n_states();
        let comp = zero_waste_components(graph);
        let k = comp.iter().max().map_or(0, |c| c + 1);
        let mut entries = vec![Waste::Infeasible; k * k];
        let mut origin = vec![(usize::MAX, usize::MAX); k * k];
        for v in 0..n {
            for u in 0..n {
                let (a, b) = (comp[v], comp[u]);
                if a == b {
                    continue;
                }
                let Some(w) = graph.weight(v, u) else { continue };
                let slot = a * k + b;
                if entries[slot].value().is_none_or(|cur| w < cur) {
                    entries[slot] = Waste::Feasible(w.clone());
                    origin[slot] = (v, u);
                }
            }
        }
        Self { comp, graph: WasteGraph::from_entries(k, entries), origin }
    }

    /// Expands a tree on components into a tree on states: inside every
    /// component, zero-waste edges lead to the state that carries the exit.
    fn lift(&self, graph: &WasteGraph, root: StateId, tree: &Arborescence) -> Arborescence {
        let n = graph.n_states();
        let k = self.graph.n_states();
        let mut successor = vec![None; n];
        let mut targets = vec![root];
        for (a, b) in tree.edges() {
            let (v, u) = self.origin[a * k + b];
            successor[v] = Some(u);
            targets.push(v);
        }
        for target in targets {
            let c = self.comp[target];
            let mut stack = vec![target];
            let mut seen = vec![false; n];
            seen[target] = true;
            while let Some(t) = stack.pop() {
                for v in 0..n {
                    if !seen[v] && self.comp[v] == c && successor[v].is_none() && v != root && graph.is_zero(v, t) {
                        seen[v] = true;
                        successor[v] = Some(t);
                        stack.push(v);
                    }
                }
            }
        }
        Arborescence { root, successor, total_waste: tree.total_waste.clone() }
    }
}

/// Stochastic potentials of every state of a waste graph.
pub fn potentials_from_graph(graph: &WasteGraph, revision: &str) -> Result<StochasticPotentialTable> {
    let condensed = Condensed::new(graph);
    let comp = &condensed.comp;
    let mut representatives: BTreeMap<usize, StateId> = BTreeMap::new();
    for (v, &c) in comp.iter().enumerate() {
        representatives.entry(c).or_insert(v);
    }
    let solver = ArborescenceSolver::new(&condensed.graph);
    let trees = representatives
        .iter()
        .map(|(&c, &v)| (c, v))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, root)| {
            let tree = solver.solve(c).map_err(|e| match e {
                Error::Unreachable(other) => Error::Unreachable(comp.iter().position(|&x| x == other).unwrap_or(other)),
                e => e,
            })?;
            Ok(condensed.lift(graph, root, &tree))
        })
        .collect::<Result<Vec<_>>>()?;
    let potentials = comp.iter().map(|&c| trees[c].total_waste.clone()).collect();
    let witnesses = trees.into_iter().map(|t| (t.root, t)).collect();
    Ok(StochasticPotentialTable::from_potentials(revision.to_string(), potentials, witnesses))
}

/// Same table, one tree per state; slower, kept as a cross-check.
pub fn potentials_per_root(graph: &WasteGraph, revision: &str) -> Result<StochasticPotentialTable> {
    let solver = ArborescenceSolver::new(graph);
    let trees = (0..graph.n_states()).into_par_iter().map(|root| solver.solve(root)).collect::<Result<Vec<_>>>()?;
    let potentials = trees.iter().map(|t| t.total_waste.clone()).collect();
    Ok(StochasticPotentialTable::from_potentials(revision.to_string(), potentials, BTreeMap::new()))
}

/// `W(s)` for every state under `revision`; the argmin is the stochastically stable set.
pub fn stochastic_potentials(game: &Game, revision: &RevisionProcess) -> Result<StochasticPotentialTable> {
    let graph = WasteGraph::build(game, revision)?;
    potentials_from_graph(&graph, revision.kind())
}
