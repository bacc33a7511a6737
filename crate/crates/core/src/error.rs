use thiserror::Error;

/// Errors raised across the simulator and tomography pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("integrator step too large: local error estimate {estimate:.3e} exceeds {limit:.1e}")]
    StepTooLarge { estimate: f64, limit: f64 },

    #[error("channel is not completely positive: Choi eigenvalue {0:.3e}")]
    CpViolation(f64),

    #[error("circuit compilation failed verification: distance {distance:.3e}, leakage {leakage:.3e}")]
    CompileError { distance: f64, leakage: f64 },

    #[error("measurement grid underdetermined: {0}")]
    UnderdeterminedGrid(String),

    #[error("reconstruction did not converge: {0}")]
    NonConvergence(String),

    #[error("encoding `{0}` is not supported here")]
    EncodingUnsupported(String),

    #[error("a seed is required for reproducible sampling")]
    SeedRequired,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
