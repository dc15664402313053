//! Generators, oracles and property bodies shared by the property suite and
//! the acceptance target.

#![allow(dead_code)]

use logit_stability::game::{PotentialCheck, WeightedPotential};
use logit_stability::rational::{int, ratio};
use logit_stability::revision::{full_mask, RevisionProcess};
use logit_stability::stability::waste::{subset_waste, RegretTable};
use logit_stability::stability::{
    brute_force_arborescence, min_in_arborescence, potentials_per_root, stochastic_potentials, waste,
    zero_waste_closure, Waste, WasteGraph,
};
use logit_stability::zoo::{make_network_design, Edge, LoadBalancingSpec, NetworkDesignSpec, ParallelLinksSpec};
use logit_stability::{Game, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const CAP: u64 = 1 << 20;
pub const CASES: u32 = 256;

pub type Check = Result<(), TestCaseError>;

pub fn config() -> ProptestConfig {
    ProptestConfig { cases: CASES, ..ProptestConfig::default() }
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, prop::sample::select(vec![1i64, 2, 3, 4])).prop_map(|(p, q)| ratio(p, q))
}

/// Two or three players with two or three strategies each.
fn counts() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=3)
}

/// Arbitrary normal-form game with small rational utilities.
pub fn any_game() -> impl Strategy<Value = Game> {
    counts().prop_flat_map(|c| {
        let size: usize = c.iter().product();
        let n = c.len();
        prop::collection::vec(small_rational(), size * n).prop_map(move |u| {
            let costs = vec![int(1); size];
            Game::from_tables("random", c.clone(), CAP, u, costs).unwrap()
        })
    })
}

/// Weighted potential game `u_i = -w_i φ(s) + h_i(s_{-i})` with weights in `1..=max_weight`.
pub fn potential_game(max_weight: i64) -> impl Strategy<Value = Game> {
    counts().prop_flat_map(move |c| {
        let size: usize = c.iter().product();
        let n = c.len();
        (
            prop::collection::vec(small_rational(), size),
            prop::collection::vec(small_rational(), size * n),
            prop::collection::vec(1i64..=max_weight, n),
        )
            .prop_map(move |(phi, h, w)| {
                let probe =
                    Game::from_tables("probe", c.clone(), CAP, vec![int(0); size * n], vec![int(0); size]).unwrap();
                let space = probe.space();
                let mut u = Vec::with_capacity(size * n);
                for (s, phi_s) in phi.iter().enumerate() {
                    for (i, w_i) in w.iter().enumerate() {
                        // h_i only sees the others' strategies
                        let base = space.with_strategy(s, i, 0);
                        u.push(-(phi_s * int(*w_i)) + &h[base * n + i]);
                    }
                }
                let costs = phi.iter().map(|p| p + int(13)).collect();
                Game::from_tables("potential", c.clone(), CAP, u, costs)
                    .unwrap()
                    .with_potential(WeightedPotential {
                        values: phi.clone(),
                        weights: w.iter().map(|&x| int(x)).collect(),
                    })
                    .unwrap()
            })
    })
}

pub fn any_potential_game() -> impl Strategy<Value = Game> {
    potential_game(3)
}

pub fn load_balancing_game() -> impl Strategy<Value = Game> {
    (1usize..=3, prop::collection::vec((1i64..=6, 1i64..=3), 1..=4)).prop_map(|(machines, jobs)| {
        let weights = jobs.iter().map(|&(p, q)| ratio(p, q)).collect();
        LoadBalancingSpec::new(machines, weights).unwrap().build(CAP).unwrap()
    })
}

pub fn parallel_links_game() -> impl Strategy<Value = Game> {
    (prop::collection::vec((1i64..=8, 1i64..=3), 1..=3), 1usize..=4).prop_map(|(costs, players)| {
        let mut costs: Vec<Rational> = costs.iter().map(|&(p, q)| ratio(p, q)).collect();
        costs.sort();
        ParallelLinksSpec::new(costs, players).unwrap().build(CAP).unwrap()
    })
}

/// Shapley cost sharing on a four-node network; spokes to the terminal are
/// always present so every source connects.
pub fn network_design_game() -> impl Strategy<Value = Game> {
    (prop::collection::vec(prop::option::weighted(0.6, 1i64..=6), 6), prop::collection::vec(0usize..3, 1..=3)).prop_map(
        |(costs, sources)| {
            let nodes = ["a", "b", "c", "t"];
            let pairs = [("a", "t"), ("b", "t"), ("c", "t"), ("a", "b"), ("b", "c"), ("a", "c")];
            let edges = pairs
                .iter()
                .zip(&costs)
                .enumerate()
                .filter_map(|(i, (&(u, v), c))| c.or((i < 3).then_some(2)).map(|c| (u, v, c)))
                .map(|(u, v, c)| Edge { endpoints: (u.into(), v.into()), cost: int(c) })
                .collect();
            let spec = NetworkDesignSpec {
                nodes: nodes.iter().map(|s| s.to_string()).collect(),
                edges,
                player_sources: sources.iter().map(|&i| nodes[i].to_string()).collect(),
                terminal: "t".into(),
            };
            make_network_design(&spec, CAP).unwrap()
        },
    )
}

/// Strongly connected waste graph on 2 to 5 states, plus a root.
pub fn any_waste_graph() -> impl Strategy<Value = (WasteGraph, usize)> {
    (2usize..=5, prop::collection::vec(prop::option::weighted(0.7, 0i64..=6), 25), 0usize..5).prop_map(
        |(n, raw, root)| {
            let mut entries = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    // the cycle i -> i+1 keeps every root reachable
                    let w = if j == (i + 1) % n { Some(raw[i * 5 + j].unwrap_or(3)) } else { raw[i * 5 + j] };
                    entries.push(w.map_or(Waste::Infeasible, |v| Waste::Feasible(ratio(v, 2))));
                }
            }
            (WasteGraph::from_entries(n, entries), root % n)
        },
    )
}

fn independent() -> RevisionProcess {
    RevisionProcess::independent_half()
}

/// Waste from the definition: least total regret over every revising set
/// that contains all movers.
pub fn oracle_waste(game: &Game, from: usize, to: usize) -> Rational {
    let space = game.space();
    let n = game.n_players();
    let moved = space.deviation(from, to).0;
    (0..=full_mask(n))
        .filter(|j| j & moved == moved)
        .map(|j| {
            (0..n)
                .filter(|i| j >> i & 1 == 1)
                .map(|i| {
                    let best = game.best_response_value(from, i);
                    let took = space.with_strategy(from, i, space.strategy(to, i));
                    best - game.utility(i, took)
                })
                .sum::<Rational>()
        })
        .min()
        .unwrap()
}

fn simultaneous_best_response(game: &Game, from: usize, to: usize) -> bool {
    let space = game.space();
    space.deviation(from, to).players().all(|i| game.best_responses(from, i).contains(&space.strategy(to, i)))
}

/// Independent-learning waste equals the definition, is nonnegative, and is
/// zero exactly on simultaneous best responses.
pub fn waste_matches_definition(game: &Game) -> Check {
    let rev = independent();
    for from in 0..game.n_states() {
        for to in (0..game.n_states()).filter(|&t| t != from) {
            let w = waste(game, &rev, from, to);
            let expected = oracle_waste(game, from, to);
            prop_assert_eq!(w.value(), Some(&expected));
            prop_assert!(expected >= Rational::zero());
            prop_assert_eq!(w.is_zero(), simultaneous_best_response(game, from, to));
        }
    }
    Ok(())
}

pub fn asynchronous_waste_is_unilateral(game: &Game) -> Check {
    for from in 0..game.n_states() {
        for to in (0..game.n_states()).filter(|&t| t != from) {
            let w = waste(game, &RevisionProcess::Asynchronous, from, to);
            let movers = game.space().deviation(from, to).len();
            prop_assert_eq!(w.is_feasible(), movers == 1);
            if movers == 1 {
                prop_assert_eq!(w.is_zero(), simultaneous_best_response(game, from, to));
            }
        }
    }
    Ok(())
}

pub fn waste_grows_with_revising_set(game: &Game) -> Check {
    let regret = RegretTable::new(game);
    let all = full_mask(game.n_players());
    for from in 0..game.n_states() {
        for to in 0..game.n_states() {
            for j in 0..=all {
                let Some(small) = subset_waste(game, &regret, from, to, j) else { continue };
                for extra in 0..=all {
                    let big = subset_waste(game, &regret, from, to, j | extra).unwrap();
                    prop_assert!(small <= big);
                }
            }
        }
    }
    Ok(())
}

pub fn arborescence_matches_brute_force(graph: &WasteGraph, root: usize) -> Check {
    let tree = min_in_arborescence(graph, root).unwrap();
    let brute = brute_force_arborescence(graph, root).unwrap();
    prop_assert_eq!(&tree.total_waste, &brute);
    let summed: Rational = tree.edges().map(|(u, v)| graph.weight(u, v).unwrap().clone()).sum();
    prop_assert_eq!(summed, brute);
    Ok(())
}

pub fn potential_identity(game: &Game) -> Check {
    prop_assert_eq!(game.check_weighted_potential().unwrap(), PotentialCheck::Ok);
    Ok(())
}

pub fn some_nash_is_stable(game: &Game) -> Check {
    let nash = game.nash_set().nash;
    for rev in [independent(), RevisionProcess::Asynchronous] {
        let table = stochastic_potentials(game, &rev).unwrap();
        prop_assert!(!table.argmin.is_disjoint(&nash), "{}: stable {:?}, nash {:?}", rev, table.argmin, nash);
    }
    Ok(())
}

/// Exact potential games only: weights break the symmetry of waste.
pub fn asynchronous_stable_is_potential_argmin(game: &Game) -> Check {
    let table = stochastic_potentials(game, &RevisionProcess::Asynchronous).unwrap();
    prop_assert_eq!(Some(table.argmin), game.potential_minimizers());
    Ok(())
}

pub fn condensed_matches_per_root(game: &Game) -> Check {
    for rev in [independent(), RevisionProcess::Asynchronous] {
        let graph = WasteGraph::build(game, &rev).unwrap();
        let fast = stochastic_potentials(game, &rev).unwrap();
        let slow = potentials_per_root(&graph, rev.kind()).unwrap();
        prop_assert_eq!(fast.potentials, slow.potentials);
    }
    Ok(())
}

pub fn zero_waste_paths_reach_nash(game: &Game) -> Check {
    let nash = game.nash_set().nash;
    let graph = WasteGraph::build(game, &RevisionProcess::Asynchronous).unwrap();
    for s in 0..game.n_states() {
        prop_assert!(!zero_waste_closure(&graph, s).is_disjoint(&nash), "state {}", s);
    }
    Ok(())
}
