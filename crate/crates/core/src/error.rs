//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by the landscape computations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("row {row} of W is zero, so its direction is undefined")]
    ZeroRow { row: usize },

    #[error("rows {first} and {second} are parallel or antiparallel; the loss is not twice differentiable there")]
    Parallel { first: String, second: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not in the fixed-point space: worst deviation {deviation:.3e} at entry ({row}, {col})")]
    NotFixed { deviation: f64, row: usize, col: usize },

    #[error("Newton did not converge in {iterations} iterations (final residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64, history: Vec<f64> },

    #[error("Jacobian is numerically singular (1-norm condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("continuation terminated after {samples} samples; last good d = {last_good}: {reason}")]
    PathTerminated { last_good: f64, samples: usize, reason: String },

    #[error("coefficient system `{system}` unsolved from every initialization: {}", trials.join("; "))]
    CoefficientSystem { system: String, trials: Vec<String> },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of an iterative method, as opposed to invalid input.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::Singular { .. }
                | Error::PathTerminated { .. }
                | Error::CoefficientSystem { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
