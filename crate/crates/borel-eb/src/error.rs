//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Parameters outside their admissible region (e.g. theta not in (0,1)).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An argument outside the domain of an operation (e.g. x below the
    /// support start r).
    #[error("domain error: {0}")]
    Domain(String),

    /// Successive quadrature refinements failed to agree; both estimates are
    /// reported so the caller can judge the discrepancy.
    #[error("quadrature did not converge: successive log-estimates {previous} and {current}")]
    QuadratureNonConvergence { previous: f64, current: f64 },

    /// A branching-process simulation exceeded the population safety cap.
    #[error("simulated population exceeded the safety cap of {cap} individuals")]
    SimulationOverflow { cap: u64 },

    /// Malformed external input (frequency-table or config files).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
