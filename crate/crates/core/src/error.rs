use thiserror::Error;

/// Errors produced by the quaternion tensor library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("division by a zero quaternion")]
    ZeroDivision,

    #[error("complex adjoint block structure violated: deviation {deviation:.3e} exceeds {allowed:.3e}")]
    StructureViolation { deviation: f64, allowed: f64 },

    #[error("Jacobi SVD did not converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    ConvergenceFailure { sweeps: usize, off: f64 },

    #[error("tensor is singular: |A A^+ - I| = {0:.3e}")]
    Singular(f64),

    #[error("nested solves disagree: {0}")]
    InternalInconsistency(String),

    #[error("could not generate an inconsistent instance after {0} attempts")]
    GenerationFailure(usize),

    #[error("oracle size limit exceeded: {actual} real unknowns > {limit}")]
    SizeExceeded { actual: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
