//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KentError {
    /// An input lies outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iteration failed to converge within its budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// The concave subproblem has no finite maximizer.
    #[error("unbounded objective: {0}")]
    UnboundedObjective(String),

    /// Data carry no usable directional information (zero resultant, empty
    /// cluster, all-zero weights).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Exact Kent sampling (β above the floor) is not supported.
    #[error("unsupported sampling: {0}")]
    UnsupportedSampling(String),

    /// Every restart of a fit failed.
    #[error("fit failed: {0}")]
    FitFailed(String),

    /// A retraction target was rank deficient.
    #[error("retraction failed: {0}")]
    Retraction(String),

    /// Malformed text input (CSV, JSON, PPM header).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Structurally invalid file contents.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KentError>;
