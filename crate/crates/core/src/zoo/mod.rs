//! Game constructors and the JSON game format.
//!
//! ```json
//! {"type": "load_balancing", "machines": 2, "jobs": ["2", "2", "1", "1"]}
//! {"type": "parallel_links", "costs": ["1", "2"], "players": 3}
//! {"type": "network_design", "nodes": ["s1", "s2", "t"],
//!  "edges": [["s1", "t", "2"], ["s2", "t", "2"], ["s1", "s2", "1"]],
//!  "players": ["s1", "s2"], "terminal": "t"}
//! {"type": "normal_form", "strategy_counts": [2, 2],
//!  "utilities": [["0", "0"], ["1", "3"], ["2", "1"], ["0", "0"]]}
//! ```
//!
//! Rationals are strings (`"p/q"` or `"n"`). `normal_form` utilities are
//! indexed by StateId, then player; a flat array of the same values is also
//! accepted. Optional `normal_form` fields: `costs` (per StateId, default
//! `-Σ_i u_i`), `potential` (per StateId) with `potential_weights` (per
//! player), and `labels` (per player, per strategy).

pub mod load_balancing;
pub mod network;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, Profile, WeightedPotential};
use crate::rational::{self, Rational};

pub use load_balancing::{
    lb_poa_witness_spec, lb_pos_apx_profile, lb_pos_apx_states, lb_pos_opt_profile, lb_pos_opt_states,
    lb_pos_parameters, lb_pos_spec, lb_unit_spec, make_lb_pos_instance, make_lb_unit_instance, LoadBalancingSpec,
};
pub use network::{
    make_network_design, make_parallel_links, make_triangle, triangle_spec, Edge, NetworkDesignSpec, ParallelLinksSpec,
    DEFAULT_PATH_CAP, TRIANGLE_STATES,
};

/// Serializable description of a game; the on-disk format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    LoadBalancing {
        machines: usize,
        #[serde(with = "rational::serde_vec")]
        jobs: Vec<Rational>,
    },
    NetworkDesign {
        nodes: Vec<String>,
        edges: Vec<[String; 3]>,
        players: Vec<String>,
        terminal: String,
    },
    ParallelLinks {
        #[serde(with = "rational::serde_vec")]
        costs: Vec<Rational>,
        players: usize,
    },
    NormalForm {
        strategy_counts: Vec<usize>,
        utilities: UtilityTable,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        costs: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        potential: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        potential_weights: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<Vec<String>>>,
    },
}

/// Utilities of a `normal_form` game, nested `[state][player]` or flat row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UtilityTable {
    Nested(Vec<Vec<String>>),
    Flat(Vec<String>),
}

impl GameSpec {
    pub fn from_network(spec: &NetworkDesignSpec) -> Self {
        GameSpec::NetworkDesign {
            nodes: spec.nodes.clone(),
            edges: spec
                .edges
                .iter()
                .map(|e| [e.endpoints.0.clone(), e.endpoints.1.clone(), rational::format(&e.cost)])
                .collect(),
            players: spec.player_sources.clone(),
            terminal: spec.terminal.clone(),
        }
    }

    fn network_spec(&self) -> Result<Option<NetworkDesignSpec>> {
        let GameSpec::NetworkDesign { nodes, edges, players, terminal } = self else {
            return Ok(None);
        };
        let edges = edges
            .iter()
            .enumerate()
            .map(|(i, [u, v, c])| {
                let cost = rational::parse(c).map_err(|e| Error::Schema(format!("edges[{i}]: {e}")))?;
                Ok(Edge { endpoints: (u.clone(), v.clone()), cost })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(NetworkDesignSpec {
            nodes: nodes.clone(),
            edges,
            player_sources: players.clone(),
            terminal: terminal.clone(),
        }))
    }

    pub fn build(&self, cap: u64) -> Result<Game> {
        match self {
            GameSpec::LoadBalancing { machines, jobs } => LoadBalancingSpec::new(*machines, jobs.clone())?.build(cap),
            GameSpec::ParallelLinks { costs, players } => make_parallel_links(costs.clone(), *players, cap),
            GameSpec::NetworkDesign { .. } => {
                let spec = self.network_spec()?.expect("network variant");
                make_network_design(&spec, cap)
            }
            GameSpec::NormalForm { strategy_counts, utilities, costs, potential, potential_weights, labels } => {
                build_normal_form(
                    strategy_counts,
                    utilities,
                    costs.as_deref(),
                    potential.as_deref(),
                    potential_weights.as_deref(),
                    labels.as_ref(),
                    cap,
                )
                .map(|g| g.with_spec(self.clone()))
            }
        }
    }

    /// Class signature of a profile: machine-load multisets for load
    /// balancing, per-link counts for parallel links, the raw profile otherwise.
    pub fn class_signature(&self, profile: &Profile) -> String {
        match self {
            GameSpec::LoadBalancing { machines, jobs } => {
                LoadBalancingSpec { machines: *machines, job_weights: jobs.clone() }.class_signature(profile)
            }
            GameSpec::ParallelLinks { costs, players } => {
                ParallelLinksSpec { link_costs: costs.clone(), n_players: *players }.class_signature(profile)
            }
            _ => profile.to_string(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("game specs always serialize")
    }
}

fn parse_list(field: &str, values: &[String]) -> Result<Vec<Rational>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| rational::parse(v).map_err(|e| Error::Schema(format!("{field}[{i}]: {e}"))))
        .collect()
}

fn build_normal_form(
    counts: &[usize],
    utilities: &UtilityTable,
    costs: Option<&[String]>,
    potential: Option<&[String]>,
    potential_weights: Option<&[String]>,
    labels: Option<&Vec<Vec<String>>>,
    cap: u64,
) -> Result<Game> {
    let n = counts.len();
    let flat: Vec<Rational> = match utilities {
        UtilityTable::Flat(values) => parse_list("utilities", values)?,
        UtilityTable::Nested(rows) => {
            let mut out = Vec::with_capacity(rows.len() * n);
            for (state, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Schema(format!("utilities[{state}] has {} entries, expected {n}", row.len())));
                }
                out.extend(parse_list(&format!("utilities[{state}]"), row)?);
            }
            out
        }
    };
    let costs = match costs {
        Some(c) => parse_list("costs", c)?,
        None => flat.chunks(n.max(1)).map(|u| -u.iter().sum::<Rational>()).collect(),
    };
    if costs.iter().any(|c| *c < Rational::from_integer(0.into())) {
        return Err(Error::Schema("social costs must be nonnegative; supply a `costs` array".into()));
    }
    let mut game = Game::from_tables("normal_form", counts.to_vec(), cap, flat, costs)?;
    match (potential, potential_weights) {
        (Some(values), weights) => {
            let values = parse_list("potential", values)?;
            let weights = match weights {
                Some(w) => parse_list("potential_weights", w)?,
                None => vec![rational::int(1); n],
            };
            game = game.with_potential(WeightedPotential { values, weights })?;
        }
        (None, Some(_)) => {
            return Err(Error::Schema("`potential_weights` given without `potential`".into()));
        }
        (None, None) => {}
    }
    if let Some(labels) = labels {
        if labels.len() != n || labels.iter().zip(counts).any(|(l, &c)| l.len() != c) {
            return Err(Error::Schema("labels must list one name per strategy per player".into()));
        }
        game = game.with_labels(labels.clone());
    }
    Ok(game)
}

/// Parses a game description from JSON text. `origin` names the source in diagnostics.
pub fn parse_game_spec(text: &str, origin: &str) -> Result<GameSpec> {
    serde_json::from_str(text).map_err(|e| {
        let location = format!("{origin}:{}:{}", e.line(), e.column());
        match e.classify() {
            serde_json::error::Category::Data => Error::Schema(format!("{location}: {e}")),
            _ => Error::Parse { location, message: e.to_string() },
        }
    })
}

pub fn load_game_from_file(path: impl AsRef<Path>, cap: u64) -> Result<Game> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_game_spec(&text, &path.display().to_string())?.build(cap)
}
