use std::fmt;
use std::path::Path;

use mscluster_core::Error as CoreError;
use thiserror::Error;

/// Pipeline stage in which a failure happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Distances,
    Graph,
    Scan,
    Selection,
    Metrics,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Load => "load",
            Stage::Distances => "distances",
            Stage::Graph => "graph",
            Stage::Scan => "scan",
            Stage::Selection => "selection",
            Stage::Metrics => "metrics",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: CoreError,
    },

    #[error("[write] {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn stage(stage: Stage) -> impl FnOnce(CoreError) -> CliError {
        move |source| CliError::Stage { stage, source }
    }

    pub fn output(path: &Path, e: impl fmt::Display) -> CliError {
        CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// 2 for configuration problems, 3 for unreadable or malformed data,
    /// 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Output { .. } => 3,
            CliError::Stage { source, .. } => match source {
                CoreError::Parameter(_) => 2,
                CoreError::Parse { .. }
                | CoreError::NonNumeric { .. }
                | CoreError::Size(_)
                | CoreError::Input(_)
                | CoreError::Io(_) => 3,
                CoreError::IsolatedNode(_)
                | CoreError::Disconnected(_)
                | CoreError::Numerical(_)
                | CoreError::NotFound { .. } => 4,
            },
        }
    }
}
