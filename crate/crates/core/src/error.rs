use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    #[error("trace invariant violated: {0}")]
    TraceInvariant(String),

    #[error("element index {index} out of range (mesh has {count} elements)")]
    ElementOutOfRange { index: usize, count: usize },

    #[error("vasculature embedding failed: {0}; refine the mesh or align waypoints with mesh lines")]
    Embedding(String),

    #[error("field/mesh mismatch: {0}")]
    Mismatch(String),

    #[error("linear solve did not reach tolerance {tolerance:e}; residual history {history:?}")]
    SolverDiverged { tolerance: f64, history: Vec<f64> },

    #[error("linear system is singular (zero pivot at row {0})")]
    SingularMatrix(usize),

    #[error("efficiency undefined: total heater power is zero")]
    ZeroPower,

    #[error("operation requires a uniform heat source: {0}")]
    NonUniformSource(String),

    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("config parse error: {0}")]
    ConfigSyntax(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
