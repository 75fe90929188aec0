//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Mismatched shapes, invalid architectures, malformed experiment setups.
    #[error("configuration error: {0}")]
    Config(String),

    /// Inputs outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced a non-finite value; the message names the
    /// offending quantity.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Degenerate partitions, empty regions, failed rejection sampling.
    #[error("geometry error: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
