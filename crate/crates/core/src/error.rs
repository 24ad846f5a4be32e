use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature size {given} is below the oversampling floor; use at least {required}")]
    QuadratureTooSmall { given: usize, required: usize },

    /// A block product that does not fit inside its coefficient interval.
    #[error(
        "block n={n} (target k={k}, budget {budget}) has top index {top} beyond its interval end {interval_end}"
    )]
    BlockOverflow {
        n: u32,
        k: usize,
        budget: u64,
        top: u64,
        interval_end: u64,
    },

    #[error("target enumeration has {available} entries but block n={n} needs target k={k}")]
    MissingTarget { n: u32, k: usize, available: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
