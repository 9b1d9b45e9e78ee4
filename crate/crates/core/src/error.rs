use alloc::string::String;

/// Errors reported by the simulation and design routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A lattice, pump or input description violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation was asked for something outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The state has no weight at all, so nothing can be normalized.
    #[error("state has zero norm")]
    ZeroState,

    /// Doubling the quadrature order moved the normalized state by `residual`.
    #[error(
        "quadrature did not converge with {points} points: doubling changed the normalized state by {residual:e}"
    )]
    QuadratureNotConverged { points: usize, residual: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
