use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix not symmetric: max |A - A^T| entry {defect:e} exceeds tolerance {tol:e}")]
    Asymmetric { defect: f64, tol: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("matrix singular to working precision (condition estimate {cond:e})")]
    Singular { cond: f64 },

    #[error("root not bracketed: target {target} unreachable in ({lo}, {hi})")]
    Unbracketed { target: f64, lo: f64, hi: f64 },

    #[error("dimension {dim} exceeds cap {cap} for {what}")]
    CapExceeded { what: &'static str, dim: usize, cap: usize },

    #[error("spectral precondition violated: {0}")]
    SpectralPrecondition(String),

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("operation requires flavor {expected}, state has {actual}")]
    WrongFlavor { expected: &'static str, actual: &'static str },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("truncated probability mass {mass:e} exceeds bound {bound:e}; increase the cutoff")]
    TruncatedMass { mass: f64, bound: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ticker {0} has zero variance; cannot standardize")]
    ZeroVariance(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
