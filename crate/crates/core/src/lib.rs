//! Graph-based clustering of vector data with Markov Stability.
//!
//! The pipeline builds a sparse similarity graph from pairwise distances,
//! scans the Markov time of a continuous-time random walk on it, optimises
//! stability at every time with a generalised Louvain heuristic, and reads
//! robust partitions off the variation-of-information summaries of the scan.

pub mod data;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod louvain;
pub mod metrics;
pub mod partition;
pub mod scan;
pub mod seed;
pub mod selection;

pub use data::{load_dataset, pairwise_distances, parse_dataset, Dataset, DistanceMatrix, LabelColumn};
pub use dynamics::{diffusion_operators, transition_at_time, Autocovariance, DenseMatrix, DiffusionOperators};
pub use error::{Error, Result};
pub use graph::{build_graph, ensure_connected, Graph, GraphBuildParams, GraphMethod};
pub use louvain::{louvain_optimize, markov_stability, OptimizationOutcome, StabilityOptimizer};
pub use metrics::{ari, nmi, purity, variation_of_information};
pub use partition::Partition;
pub use scan::{log_grid, scan, ScanParams, ScanResult};
pub use seed::derive_seed;
pub use selection::{
    best_partition_vs_truth, choose_scale, find_robust_scales, select_partition_with_c, RobustScale, ScaleChoice,
    Selected, SelectionParams, Thresholds,
};
