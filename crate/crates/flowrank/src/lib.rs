//! flowrank: node orderings of weighted directed graphs that maximize the
//! total weight of forward edges (equivalently, minimize weighted feedback
//! arcs).
//!
//! The pipeline seeds an ordering with an adaptive out/in-weight greedy
//! pass, then improves it with gain-aware backward-edge correction,
//! SCC-block refinement, flat partition reordering, and a global
//! SCC-topological ranking — every pass gated on exact fixed-point forward
//! weight so improvements are real and monotone. An exhaustive oracle
//! provides ground truth at small scale.

pub mod error;
pub mod flat;
pub mod graph;
pub mod greedy;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod ranking;
pub mod refine;
pub mod scc;
pub mod stats;
pub mod weight;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use flat::{
    best_window_permutation, flat_partition_reorder, partition_interval, FlatReport,
    PartitionConfig, WindowChoice,
};
pub use graph::{Graph, GraphBuilder, InducedSubgraph, NodeId};
pub use greedy::greedy_rank;
pub use io::{
    load_edge_list, read_ranking_ids, write_edge_list, write_ranking, ColumnSpec, CsvFormat,
    HeaderMode,
};
pub use metrics::{
    back_edge_distribution, back_edge_distribution_with_max, back_edge_report, forward_ratio,
    forward_weight, validate_ranking, BackEdgeDistribution, BackEdgeStats, MetricsReport,
};
pub use oracle::{exact_optimal_ranking, exact_optimal_ranking_dp, OracleResult};
pub use pipeline::{
    apply_stage, run_pipeline, run_stage, PipelineConfig, PipelineReport, Stage, StageDefaults,
    StageOutcome,
};
pub use ranking::Ranking;
pub use refine::{
    apply_block_split, apply_fallback, block_gain_scan, block_split_gains, fallback_gains,
    greedy_fallback, refine_ranking, BlockGain, FallbackMove, RefineOptions, RefineReport,
};
pub use scc::{
    best_small_scc_order, compute_sccs, condense, refine_scc_blocks, scc_global_ranking,
    CondensationDag, SccBlockOptions, SccBlockReport, SccPartition,
};
pub use stats::{compute_stats, GraphStats};
pub use weight::{Weight, WeightScale};
