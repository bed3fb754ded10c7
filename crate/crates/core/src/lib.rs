//! Query trees on bounded-degree graphs.
//!
//! Vertices receive random ranks; each edge is oriented from its lower-ranked
//! endpoint to its higher-ranked one (both ways on a tie), and the query tree
//! of `v` is everything reachable from `v`. This crate builds those trees
//! lazily, both under exact ranks and under ranks quantized into `L` layers,
//! records the layer-by-layer exposure process used to bound their size,
//! answers greedy-MIS membership queries locally on top of them, and runs the
//! Monte Carlo experiments that check the size bounds at desk scale.

pub mod error;
pub mod experiments;
pub mod graph;
pub mod lca;
pub mod query_tree;
pub mod rank;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{boundary, Graph, GraphSpec, Vertex};
pub use lca::{global_greedy_mis, mis_query, verify_consistency, ConsistencyReport, LcaAnswer};
pub use query_tree::{
    count_monotone_paths, layer_prefix_sizes, orient, query_tree_bfs_oracle, query_tree_exact,
    query_tree_quantized, ExplorationTrace, OrientedGraph,
};
pub use rank::{default_l, quantize, Quantizer, Rank, RankMode, RankOracle};
pub use seed::Seed;
