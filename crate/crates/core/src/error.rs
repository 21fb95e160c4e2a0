//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by generators, engines and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its valid range (probability, count, degree).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An inconsistent or incomplete configuration (missing assignments,
    /// uncovered degree class, missing hypothesis parameter).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Generation produced an unusable substrate (e.g. empty giant component).
    #[error("generation failed: {0}")]
    Generation(String),

    /// A malformed input file, with 1-based line number where applicable.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A required upstream artifact is missing (e.g. experiment 5 without a
    /// trained model from experiment 4).
    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
