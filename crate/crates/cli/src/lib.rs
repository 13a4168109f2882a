//! End-to-end driver: configuration, the clustering pipeline, benchmark
//! tables and the on-disk artifact formats.

pub mod bench;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use bench::{run_benchmark, BenchRow, BenchTable};
pub use config::PipelineConfig;
pub use error::{CliError, Stage};
pub use pipeline::{run_pipeline, with_threads, Metrics, RunReport};
