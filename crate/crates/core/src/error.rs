use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("{function}: argument {value:?} outside domain {domain}")]
    Domain {
        function: &'static str,
        value: Vec<f64>,
        domain: &'static str,
    },

    #[error("non-finite activations in layer {layer}")]
    NumericalFailure { layer: usize },

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    TrainingDiverged { epoch: usize, loss: f64 },

    #[error("insufficient data: {have} samples, need at least {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("iteration {iteration} claimed no inliers")]
    NoProgress { iteration: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier printed after `error_kind=` by the command line tool.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidConfig { .. } => "invalid_config",
            Error::Domain { .. } => "domain",
            Error::NumericalFailure { .. } => "numerical_failure",
            Error::TrainingDiverged { .. } => "training_diverged",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::NoProgress { .. } => "no_progress",
            Error::InvalidRegion(_) => "invalid_region",
            Error::UnsupportedSize(_) => "unsupported_size",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Usage(_) => "usage",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
