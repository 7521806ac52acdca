//! Error type shared by all estimation operations.

use thiserror::Error;

/// Errors produced by geometry construction, simulation, and estimation.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The operation was applied in a state it does not support.
    #[error("usage error: {0}")]
    Usage(String),

    /// A matrix is numerically singular; for Capon this means the loading
    /// term must be increased.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// The estimation problem is degenerate (e.g. coincident angles or an
    /// unusable subarray configuration).
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// A numerical estimation step failed to produce usable output.
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// Fewer spectral peaks were found than sources requested. Carries the
    /// peak angles (degrees, ranked by height) that were found.
    #[error("underresolved spectrum: needed {needed} peaks, found {found:?}")]
    Underresolved { needed: usize, found: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
