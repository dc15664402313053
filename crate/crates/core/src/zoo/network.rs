//! Broadcast network design with Shapley cost sharing.
//!
//! Players pick a simple path from their source to a common terminal; each
//! edge's cost is split equally among the players whose paths use it. The
//! Rosenthal function `Σ_e c_e · H(n_e)` is an exact potential (weights 1).

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{Game, StateId, WeightedPotential};
use crate::rational::{self, int, Rational};
use crate::zoo::GameSpec;

/// Default cap on the number of simple paths enumerated per player.
pub const DEFAULT_PATH_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub endpoints: (String, String),
    pub cost: Rational,
}

/// Undirected network, one source node per player, shared terminal.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkDesignSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub player_sources: Vec<String>,
    pub terminal: String,
}

impl NetworkDesignSpec {
    fn node_index(&self) -> Result<HashMap<&str, usize>> {
        let mut index = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.as_str(), i).is_some() {
                return Err(Error::InvalidParams(format!("duplicate node `{n}`")));
            }
        }
        Ok(index)
    }

    /// Simple paths (as edge-index lists) from every player's source to the
    /// terminal, in depth-first order following the edge list.
    pub fn enumerate_paths(&self, path_cap: usize) -> Result<Vec<Vec<Vec<usize>>>> {
        let index = self.node_index()?;
        let lookup =
            |name: &str| index.get(name).copied().ok_or_else(|| Error::InvalidParams(format!("unknown node `{name}`")));
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.nodes.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.cost <= Rational::zero() {
                return Err(Error::InvalidParams(format!("edge {e} has a nonpositive cost")));
            }
            let u = lookup(&edge.endpoints.0)?;
            let v = lookup(&edge.endpoints.1)?;
            if u == v {
                return Err(Error::InvalidParams(format!("edge {e} is a self-loop")));
            }
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        let terminal = lookup(&self.terminal)?;
        if self.player_sources.is_empty() {
            return Err(Error::InvalidParams("need at least one player".into()));
        }

        let mut all = Vec::with_capacity(self.player_sources.len());
        for (player, source) in self.player_sources.iter().enumerate() {
            let start = lookup(source)?;
            let mut paths = Vec::new();
            let mut visited = vec![false; self.nodes.len()];
            let mut stack = Vec::new();
            visited[start] = true;
            dfs(start, terminal, &adjacency, &mut visited, &mut stack, &mut paths, path_cap)
                .map_err(|_| Error::TooManyPaths { player, cap: path_cap })?;
            if paths.is_empty() {
                return Err(Error::DisconnectedPlayer { player, node: source.clone() });
            }
            all.push(paths);
        }
        Ok(all)
    }

    pub fn build(&self, path_cap: usize, cap: u64) -> Result<Game> {
        let paths = self.enumerate_paths(path_cap)?;
        let counts = paths.iter().map(Vec::len).collect();
        let n_edges = self.edges.len();
        let mut potential = Vec::new();
        let name = format!("network_design({} nodes, {} players)", self.nodes.len(), self.player_sources.len());
        let game = Game::from_fn(name, counts, cap, |profile| {
            let mut usage = vec![0usize; n_edges];
            for (player, &k) in profile.0.iter().enumerate() {
                for &e in &paths[player][k] {
                    usage[e] += 1;
                }
            }
            let utilities = profile
                .0
                .iter()
                .enumerate()
                .map(|(player, &k)| {
                    -paths[player][k].iter().map(|&e| &self.edges[e].cost / int(usage[e] as i64)).sum::<Rational>()
                })
                .collect();
            let mut cost = Rational::zero();
            let mut phi = Rational::zero();
            for (e, &used) in usage.iter().enumerate() {
                if used > 0 {
                    cost += &self.edges[e].cost;
                    phi += &self.edges[e].cost * rational::harmonic(used);
                }
            }
            potential.push(phi);
            (utilities, cost)
        })?;
        let labels = paths
            .iter()
            .enumerate()
            .map(|(player, ps)| ps.iter().map(|p| self.path_label(player, p)).collect())
            .collect();
        let weights = vec![int(1); self.player_sources.len()];
        Ok(game
            .with_potential(WeightedPotential { values: potential, weights })?
            .with_labels(labels)
            .with_spec(GameSpec::from_network(self)))
    }

    fn path_label(&self, player: usize, path: &[usize]) -> String {
        let mut at = self.player_sources[player].clone();
        let mut label = at.clone();
        for &e in path {
            let (a, b) = &self.edges[e].endpoints;
            at = if *a == at { b.clone() } else { a.clone() };
            label.push('-');
            label.push_str(&at);
        }
        label
    }
}

struct CapExceeded;

fn dfs(
    at: usize,
    terminal: usize,
    adjacency: &[Vec<(usize, usize)>],
    visited: &mut [bool],
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> std::result::Result<(), CapExceeded> {
    if at == terminal {
        if out.len() == cap {
            return Err(CapExceeded);
        }
        out.push(stack.clone());
        return Ok(());
    }
    for &(next, e) in &adjacency[at] {
        if visited[next] {
            continue;
        }
        visited[next] = true;
        stack.push(e);
        let r = dfs(next, terminal, adjacency, visited, stack, out, cap);
        stack.pop();
        visited[next] = false;
        r?;
    }
    Ok(())
}

pub fn make_network_design(spec: &NetworkDesignSpec, cap: u64) -> Result<Game> {
    spec.build(DEFAULT_PATH_CAP, cap)
}

/// Two players at `s1`, `s2` sharing terminal `t`; edges `s1-t` and `s2-t`
/// cost 2 and `s1-s2` costs 1.
pub fn triangle_spec() -> NetworkDesignSpec {
    let edge = |a: &str, b: &str, c: i64| Edge { endpoints: (a.to_string(), b.to_string()), cost: int(c) };
    NetworkDesignSpec {
        nodes: vec!["s1".into(), "s2".into(), "t".into()],
        edges: vec![edge("s1", "t", 2), edge("s2", "t", 2), edge("s1", "s2", 1)],
        player_sources: vec!["s1".into(), "s2".into()],
        terminal: "t".into(),
    }
}

pub fn make_triangle(cap: u64) -> Result<Game> {
    let game = make_network_design(&triangle_spec(), cap)?;
    check_triangle(&game)?;
    Ok(game)
}

/// StateIds of the triangle's four states: index `k` holds `s^k`.
///
/// Strategy 0 is the direct edge and 1 the detour through the other source,
/// so `s² = (D,D)`, `s¹ = (I,D)`, `s³ = (D,I)` and `s⁰ = (I,I)`.
pub const TRIANGLE_STATES: [StateId; 4] = [3, 1, 0, 2];

/// Constructor self-test: optimum 3, worst Nash equilibrium 4, `cost(s⁰) = 5`.
fn check_triangle(game: &Game) -> Result<()> {
    let [s0, s1, s2, s3] = TRIANGLE_STATES;
    let (opt, argmin) = game.optimum_cost();
    let nash = game.nash_set().nash;
    let worst_nash = nash.iter().map(|&s| game.social_cost(s)).max().cloned();
    let ok = opt == int(3)
        && argmin == [s1, s3].into_iter().collect()
        && worst_nash == Some(int(4))
        && *game.social_cost(s0) == int(5)
        && *game.social_cost(s2) == int(4)
        && nash == [s1, s2, s3].into_iter().collect();
    if ok {
        Ok(())
    } else {
        Err(Error::InternalInconsistency("triangle instance does not reproduce costs 3/4/5".into()))
    }
}

/// `m` parallel links of nondecreasing cost between one source and the terminal.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelLinksSpec {
    pub link_costs: Vec<Rational>,
    pub n_players: usize,
}

impl ParallelLinksSpec {
    pub fn new(link_costs: Vec<Rational>, n_players: usize) -> Result<Self> {
        if link_costs.is_empty() || n_players == 0 {
            return Err(Error::InvalidParams("need at least one link and one player".into()));
        }
        if link_costs.iter().any(|c| *c <= Rational::zero()) {
            return Err(Error::InvalidParams("link costs must be positive".into()));
        }
        if link_costs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParams("link costs must be nondecreasing".into()));
        }
        Ok(Self { link_costs, n_players })
    }

    pub fn build(&self, cap: u64) -> Result<Game> {
        let m = self.link_costs.len();
        let mut potential = Vec::new();
        let game = Game::from_fn(
            format!("parallel_links(m={m}, n={})", self.n_players),
            vec![m; self.n_players],
            cap,
            |profile| {
                let mut usage = vec![0usize; m];
                for &k in &profile.0 {
                    usage[k] += 1;
                }
                let utilities = profile.0.iter().map(|&k| -(&self.link_costs[k] / int(usage[k] as i64))).collect();
                let mut cost = Rational::zero();
                let mut phi = Rational::zero();
                for (k, &used) in usage.iter().enumerate() {
                    if used > 0 {
                        cost += &self.link_costs[k];
                        phi += &self.link_costs[k] * rational::harmonic(used);
                    }
                }
                potential.push(phi);
                (utilities, cost)
            },
        )?;
        let labels = (0..self.n_players).map(|_| (1..=m).map(|k| format!("L{k}")).collect()).collect();
        Ok(game
            .with_potential(WeightedPotential { values: potential, weights: vec![int(1); self.n_players] })?
            .with_labels(labels)
            .with_spec(GameSpec::ParallelLinks { costs: self.link_costs.clone(), players: self.n_players }))
    }

    /// `N_k`: every player on link `k` (zero-based).
    pub fn all_on(&self, link: usize) -> StateId {
        (0..self.n_players).fold(0, |acc, _| acc * self.link_costs.len() + link)
    }

    /// `b₁`: the fewest players on link 0 at which joining link 0 is a best
    /// response for everyone on link 1, i.e. the least `b ≥ 1` with
    /// `ℓ₁/(b+1) ≤ ℓ₂/(n-b)`. `None` with a single link.
    pub fn switch_threshold(&self) -> Option<usize> {
        let (l1, l2) = (self.link_costs.first()?, self.link_costs.get(1)?);
        let n = self.n_players;
        (1..=n).find(|&b| b == n || l1 / int(b as i64 + 1) <= l2 / int((n - b) as i64))
    }

    /// Number of players on each link.
    pub fn class_signature(&self, profile: &crate::game::Profile) -> String {
        let mut usage = vec![0usize; self.link_costs.len()];
        for &k in &profile.0 {
            usage[k] += 1;
        }
        let parts: Vec<String> = usage.iter().map(usize::to_string).collect();
        format!("<{}>", parts.join(","))
    }
}

pub fn make_parallel_links(link_costs: Vec<Rational>, n_players: usize, cap: u64) -> Result<Game> {
    ParallelLinksSpec::new(link_costs, n_players)?.build(cap)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::game::{PotentialCheck, DEFAULT_STATE_CAP};
    use crate::rational::ratio;

    #[test]
    fn triangle_costs() {
        let g = make_triangle(DEFAULT_STATE_CAP).unwrap();
        let [s0, s1, s2, s3] = TRIANGLE_STATES;
        assert_eq!(g.n_states(), 4);
        assert_eq!(*g.social_cost(s0), int(5));
        assert_eq!(*g.social_cost(s1), int(3));
        assert_eq!(*g.social_cost(s3), int(3));
        assert_eq!(*g.social_cost(s2), int(4));
        assert_eq!(*g.utility(0, s2), int(-2));
        assert_eq!(*g.utility(1, s2), int(-2));
        assert_eq!(g.describe(s0), "(s1-s2-t,s2-s1-t)");
    }

    #[test]
    fn triangle_nash_and_ties() {
        let g = make_triangle(DEFAULT_STATE_CAP).unwrap();
        let [_, s1, s2, s3] = TRIANGLE_STATES;
        assert_eq!(g.nash_set().nash, BTreeSet::from([s1, s2, s3]));
        // tie at cost 2 in s²
        assert_eq!(g.best_responses(s2, 0), vec![0, 1]);
    }

    #[test]
    fn triangle_rosenthal_potential() {
        let g = make_triangle(DEFAULT_STATE_CAP).unwrap();
        assert_eq!(g.check_weighted_potential().unwrap(), PotentialCheck::Ok);
        let phi = &g.potential().unwrap().values;
        assert_eq!(phi[TRIANGLE_STATES[0]], ratio(11, 2));
        assert_eq!(phi[TRIANGLE_STATES[1]], int(4));
    }

    #[test]
    fn parallel_links_shares() {
        let spec = ParallelLinksSpec::new(vec![int(1), int(2)], 3).unwrap();
        let g = spec.build(DEFAULT_STATE_CAP).unwrap();
        assert_eq!(g.n_states(), 8);
        let n1 = spec.all_on(0);
        let n2 = spec.all_on(1);
        assert_eq!(*g.utility(0, n1), ratio(-1, 3));
        // alone on link 1 pays 1 > 2/3, so staying is the unique best response
        assert_eq!(g.best_responses(n2, 0), vec![1]);
        let sets = g.nash_set();
        assert!(sets.nash.contains(&n1) && sets.nash.contains(&n2));
    }

    #[test]
    fn identical_links_nash_sets() {
        let spec = ParallelLinksSpec::new(vec![int(1), int(1)], 3).unwrap();
        let g = spec.build(DEFAULT_STATE_CAP).unwrap();
        let sets = g.nash_set();
        let expected = BTreeSet::from([spec.all_on(0), spec.all_on(1)]);
        assert_eq!(sets.nash, expected);
        assert_eq!(sets.strict_nash, expected);
    }

    #[test]
    fn three_identical_links_optimum() {
        let spec = ParallelLinksSpec::new(vec![int(1); 3], 2).unwrap();
        let g = spec.build(DEFAULT_STATE_CAP).unwrap();
        assert_eq!(g.n_states(), 9);
        let (opt, argmin) = g.optimum_cost();
        assert_eq!(opt, int(1));
        assert_eq!(argmin, (0..3).map(|k| spec.all_on(k)).collect());
    }

    #[test]
    fn unsorted_links_rejected() {
        assert!(ParallelLinksSpec::new(vec![int(2), int(1)], 2).is_err());
    }

    #[test]
    fn disconnected_and_too_many_paths() {
        let mut spec = triangle_spec();
        spec.nodes.push("x".into());
        spec.player_sources.push("x".into());
        assert!(matches!(
            make_network_design(&spec, DEFAULT_STATE_CAP),
            Err(Error::DisconnectedPlayer { player: 2, .. })
        ));
        let spec = triangle_spec();
        assert!(matches!(spec.build(1, DEFAULT_STATE_CAP), Err(Error::TooManyPaths { player: 0, cap: 1 })));
    }
}
