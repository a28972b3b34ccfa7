use thiserror::Error;

/// Errors raised by the chain model, the evolvers and the measures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("dense construction needs at most {max} qubits, got {n}")]
    DimensionGuard { n: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid site selection: {0}")]
    InvalidSites(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size dt = {dt} exceeds the stability guard {limit}")]
    StepGuard { dt: f64, limit: f64 },

    #[error("positivity violated at t = {time}: minimum eigenvalue {min_eigenvalue:.3e}")]
    Positivity { time: f64, min_eigenvalue: f64 },

    #[error("trace drift {drift:.3e} at t = {time} exceeds the renormalisation ceiling")]
    TraceDrift { time: f64, drift: f64 },

    #[error("correlation has imaginary part {imag:.3e}; the state is corrupted")]
    ComplexCorrelation { imag: f64 },

    #[error("correlation matrix asymmetry {asymmetry:.3e} exceeds {limit:.1e}")]
    Asymmetric { asymmetry: f64, limit: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, ChainError>;
