use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A row of a data file could not be split into the expected fields.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    /// A feature field did not hold a finite number.
    #[error("type error at row {row}, column {column}: {value:?} is not a number")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    /// Not enough samples (or nodes) to do anything meaningful.
    #[error("size error: {0}")]
    Size(String),

    /// A caller-supplied parameter is out of range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Two inputs that must agree in size or shape do not.
    #[error("input error: {0}")]
    Input(String),

    /// The graph has a node with no edges.
    #[error("degenerate graph: node {0} is isolated")]
    IsolatedNode(usize),

    /// The graph has more than one connected component.
    #[error("graph is disconnected ({0} components)")]
    Disconnected(usize),

    /// A numerical routine produced an unusable result.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// No stored partition has the requested number of communities.
    #[error("no partition with {target} communities; available: {available:?}")]
    NotFound { target: usize, available: Vec<usize> },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
