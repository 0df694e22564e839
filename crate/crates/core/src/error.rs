use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate direction: cannot normalize a zero vector")]
    DegenerateDirection,

    #[error("degenerate retraction: f + rho*d vanished")]
    DegenerateRetraction,

    #[error("orientation violates the cap constraint by {excess:e}")]
    CapViolation { excess: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("rank-deficient MSE matrix ({0}); the stream count is likely too large for the channel rank")]
    RankDeficientMse(&'static str),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("power bisection did not converge after {iterations} iterations (power {power:e}, budget {budget:e})")]
    BisectionFailed {
        iterations: usize,
        power: f64,
        budget: f64,
    },

    #[error("monotonicity violated at iteration {iteration}: objective went from {previous} to {current}")]
    MonotonicityViolated {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
