//! Zero-noise analysis: waste, minimum in-trees, stochastic potentials and basins.

pub mod arborescence;
pub mod basin;
pub mod potential;
pub mod waste;

pub use arborescence::{brute_force_arborescence, min_in_arborescence, Arborescence, ArborescenceSolver};
pub use basin::{
    attraction_basin, coradius, limit_set, radius, radius_coradius_check, radius_coradius_check_graph,
    zero_waste_closure, BasinReport, Extended, RadiusCheck,
};
pub use potential::{potentials_from_graph, potentials_per_root, stochastic_potentials, StochasticPotentialTable};
pub use waste::{waste, waste_graph, Waste, WasteGraph};
