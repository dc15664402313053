//! Minimum-waste in-arborescences (trees in which every state has a unique
//! path to the root).
//!
//! The solver is the contraction algorithm for optimum branchings run on
//! out-edges: every non-root state picks its cheapest out-edge; if those
//! choices close a cycle, the cycle is contracted into one node whose
//! out-edges are discounted by the edge each member gives up, the smaller
//! problem is solved, and the cycle is reopened at the member whose
//! replacement edge was chosen.

use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::StateId;
use crate::rational::{self, Rational};
use crate::stability::waste::WasteGraph;

/// A spanning in-tree: every non-root state points at its successor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arborescence {
    pub root: StateId,
    /// `successor[v]` is the head of `v`'s out-edge; `None` for the root.
    pub successor: Vec<Option<StateId>>,
    #[serde(with = "rational::serde_str")]
    pub total_waste: Rational,
}

impl Arborescence {
    pub fn edges(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.successor.iter().enumerate().filter_map(|(v, s)| s.map(|t| (v, t)))
    }
}

/// Edge weights the branching solver can work with.
pub trait ArcWeight: Clone + Ord + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
}

impl ArcWeight for i128 {
    fn zero() -> Self {
        0
    }
}

impl ArcWeight for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
}

/// States that cannot reach `root` through edges with `Some` weight.
fn first_unreachable<W>(n: usize, weights: &[Option<W>], root: usize) -> Option<usize> {
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut stack = vec![root];
    while let Some(t) = stack.pop() {
        for v in 0..n {
            if !seen[v] && v != t && weights[v * n + t].is_some() {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().position(|s| !s)
}

/// Minimum in-arborescence on a dense `n x n` weight matrix (row = tail).
/// Returns the successor of every node (`root` maps to itself).
///
/// Every node must be able to reach `root`.
pub fn min_in_tree<W: ArcWeight>(n: usize, weights: &[Option<W>], root: usize) -> Vec<usize> {
    let mut best = vec![root; n];
    for v in (0..n).filter(|&v| v != root) {
        let mut choice: Option<(usize, &W)> = None;
        for u in (0..n).filter(|&u| u != v) {
            if let Some(w) = &weights[v * n + u] {
                if choice.is_none_or(|(_, c)| w < c) {
                    choice = Some((u, w));
                }
            }
        }
        best[v] = choice.expect("every node reaches the root").0;
    }

    // cycles of the functional graph v -> best[v]
    let mut mark = vec![0u8; n];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    mark[root] = 2;
    for start in 0..n {
        let mut walk = Vec::new();
        let mut v = start;
        while mark[v] == 0 {
            mark[v] = 1;
            walk.push(v);
            v = best[v];
        }
        if mark[v] == 1 {
            let at = walk.iter().position(|&x| x == v).expect("cycle start on walk");
            cycles.push(walk[at..].to_vec());
        }
        for x in walk {
            mark[x] = 2;
        }
    }
    if cycles.is_empty() {
        return best;
    }

    const NONE: usize = usize::MAX;
    let mut cycle_of = vec![NONE; n];
    for (c, cycle) in cycles.iter().enumerate() {
        for &v in cycle {
            cycle_of[v] = c;
        }
    }
    let mut new_id = vec![NONE; n];
    let mut m = cycles.len();
    for v in 0..n {
        new_id[v] = if cycle_of[v] == NONE {
            m += 1;
            m - 1
        } else {
            cycle_of[v]
        };
    }

    let mut contracted: Vec<Option<W>> = vec![None; m * m];
    let mut origin = vec![(NONE, NONE); m * m];
    for v in (0..n).filter(|&v| v != root) {
        let discount = (cycle_of[v] != NONE).then(|| weights[v * n + best[v]].clone().expect("chosen edge"));
        for u in (0..n).filter(|&u| u != v) {
            let Some(w) = &weights[v * n + u] else { continue };
            let (a, b) = (new_id[v], new_id[u]);
            if a == b {
                continue;
            }
            let w = match &discount {
                Some(d) => w.clone() - d.clone(),
                None => w.clone(),
            };
            let slot = a * m + b;
            if contracted[slot].as_ref().is_none_or(|cur| w < *cur) {
                contracted[slot] = Some(w);
                origin[slot] = (v, u);
            }
        }
    }

    let reduced = min_in_tree(m, &contracted, new_id[root]);
    let mut successor = best;
    for a in (0..m).filter(|&a| a != new_id[root]) {
        let (v, u) = origin[a * m + reduced[a]];
        successor[v] = u;
    }
    successor[root] = root;
    successor
}

fn total<W: ArcWeight>(n: usize, weights: &[Option<W>], successor: &[usize], root: usize) -> W {
    (0..n)
        .filter(|&v| v != root)
        .fold(W::zero(), |acc, v| acc + weights[v * n + successor[v]].clone().expect("tree edge"))
}

/// Edge weights of a waste graph prepared once for many roots: scaled to
/// integers when they fit, exact rationals otherwise.
pub struct ArborescenceSolver {
    n: usize,
    weights: PreparedWeights,
}

enum PreparedWeights {
    Scaled(Vec<Option<i128>>, BigInt),
    Exact(Vec<Option<Rational>>),
}

impl ArborescenceSolver {
    pub fn new(graph: &WasteGraph) -> Self {
        let n = graph.n_states();
        let weights = match graph.integer_weights() {
            Some((ints, scale)) => PreparedWeights::Scaled(ints, scale),
            None => PreparedWeights::Exact((0..n * n).map(|i| graph.weight(i / n, i % n).cloned()).collect()),
        };
        Self { n, weights }
    }

    /// Minimum-waste spanning tree directed into `root`; its waste is the
    /// stochastic potential `W(root)`.
    pub fn solve(&self, root: StateId) -> Result<Arborescence> {
        let n = self.n;
        if root >= n {
            return Err(Error::InvalidParams(format!("root {root} out of range")));
        }
        let (successor, total_waste) = match &self.weights {
            PreparedWeights::Scaled(ints, scale) => {
                if let Some(v) = first_unreachable(n, ints, root) {
                    return Err(Error::Unreachable(v));
                }
                let succ = min_in_tree(n, ints, root);
                let t = total(n, ints, &succ, root);
                (succ, Rational::new(BigInt::from(t), scale.clone()))
            }
            PreparedWeights::Exact(exact) => {
                if let Some(v) = first_unreachable(n, exact, root) {
                    return Err(Error::Unreachable(v));
                }
                let succ = min_in_tree(n, exact, root);
                let t = total(n, exact, &succ, root);
                (succ, t)
            }
        };
        Ok(Arborescence {
            root,
            successor: successor.into_iter().enumerate().map(|(v, s)| (v != root).then_some(s)).collect(),
            total_waste,
        })
    }
}

/// Minimum-waste spanning tree directed into `root`.
pub fn min_in_arborescence(graph: &WasteGraph, root: StateId) -> Result<Arborescence> {
    ArborescenceSolver::new(graph).solve(root)
}

/// Largest graph [`brute_force_arborescence`] accepts.
pub const BRUTE_FORCE_CAP: usize = 8;

/// Exhaustive minimum over every successor assignment that forms an in-tree.
pub fn brute_force_arborescence(graph: &WasteGraph, root: StateId) -> Result<Rational> {
    let n = graph.n_states();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge(n));
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    let mut choice = vec![0usize; others.len()];
    let mut successor = vec![root; n];
    let mut best: Option<Rational> = None;
    'outer: loop {
        for (slot, &v) in others.iter().enumerate() {
            successor[v] = choice[slot];
        }
        let feasible = others.iter().all(|&v| successor[v] != v && graph.weight(v, successor[v]).is_some());
        if feasible && is_in_tree(&successor, root) {
            let w: Rational = others.iter().map(|&v| graph.weight(v, successor[v]).unwrap()).sum();
            if best.as_ref().is_none_or(|b| w < *b) {
                best = Some(w);
            }
        }
        // odometer over n^(n-1) assignments
        for c in choice.iter_mut() {
            *c += 1;
            if *c < n {
                continue 'outer;
            }
            *c = 0;
        }
        break;
    }
    best.ok_or_else(|| {
        let v = others.first().copied().unwrap_or(root);
        Error::Unreachable(v)
    })
}

fn is_in_tree(successor: &[usize], root: usize) -> bool {
    let n = successor.len();
    (0..n).all(|start| {
        let mut v = start;
        for _ in 0..n {
            if v == root {
                return true;
            }
            v = successor[v];
        }
        v == root
    })
}
