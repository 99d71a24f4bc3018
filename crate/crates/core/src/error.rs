use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("QR iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("matrix is not (numerically) diagonalizable: kappa(P) = {kappa:.3e} exceeds {kappa_max:.3e}")]
    NonDiagonalizable { kappa: f64, kappa_max: f64 },

    #[error("matrix is singular (pivot {pivot:.3e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("vector has vanishing norm ({norm:.3e})")]
    ZeroVector { norm: f64 },

    #[error("state has no component in the dominant subset (Q-norm {norm:.3e})")]
    ProjectionZero { norm: f64 },

    #[error("Q-norm drifted by {drift:.3e} at t = {time}; reduce the step size")]
    StepSizeTooLarge { drift: f64, time: f64 },

    #[error("time grid too coarse: {samples} samples, need at least {required}")]
    GridTooCoarse { samples: usize, required: usize },

    #[error("random instance specification infeasible: {0}")]
    SpecInfeasible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
