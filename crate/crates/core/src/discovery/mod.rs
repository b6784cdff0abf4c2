//! Process discovery: directly-follows graphs, the directly-follows miner
//! with a path filter, and the alpha miner.

mod alpha;
mod dfg;
mod dfm;

use thiserror::Error;

pub use alpha::{alpha_from_dfg, maximal_pairs, mine_alpha, AlphaPair, Footprint, Relation};
pub use dfg::{build_dfg, DirectlyFollowsGraph};
pub use dfm::{mine_dfm, select_edges, EdgeSelection};

#[derive(Debug, Error, PartialEq)]
pub enum DiscoveryError {
    #[error("paths must lie in [0, 1], got {0}")]
    InvalidPaths(f64),
}
