//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value is outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Bitstring encoding or decoding failed.
    #[error("codec error: {0}")]
    Codec(String),

    /// Invalid parameter set (unknown residue, asymmetric matrix, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An enumeration or memory budget was exceeded.
    #[error("resource error: {0}")]
    Resource(String),

    /// Optimization failed irrecoverably.
    #[error("optimizer error: {0}")]
    Optimizer(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
