//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by corpus IO, training, placement, and sampling.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error("unknown class `{0}`")]
    UnknownClass(String),

    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("polygon is not a simple axis-aligned rectilinear polygon: {0}")]
    BadPolygon(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),

    #[error("recipe infeasible: {0}")]
    InfeasibleRecipe(String),

    #[error("contents overflow the fixed boundary: {0}")]
    Overflow(String),

    #[error("invalid constraint spec: {0}")]
    InvalidConstraint(String),

    #[error("rejection sampling exhausted after {attempts} attempts; rejections: {tallies}")]
    Exhausted {
        attempts: u64,
        tallies: crate::constraints::RejectionTallies,
    },
}

impl CoreError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
