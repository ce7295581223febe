use crate::solver::EigenResult;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Dimension must be at least 2 (two outcomes per measurement).
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    /// A parameter was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Schmidt coefficients must satisfy sum(alpha_i^2) = 1.
    #[error("state is not normalised: sum of squares is {0}")]
    NotNormalized(f64),

    /// Two containers that must agree in length did not.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A dense-matrix path was requested beyond its configured cap.
    #[error("dense representation refused: d = {d} exceeds cap {cap}")]
    DenseCapExceeded { d: usize, cap: usize },

    /// Power iteration hit its iteration budget before reaching the
    /// residual tolerance. The best iterate found so far is carried
    /// along so callers can still inspect it.
    #[error(
        "power iteration did not converge: residual {resid:.3e} after {iters} iterations",
        resid = best.residual,
        iters = best.iterations
    )]
    NotConverged { best: Box<EigenResult> },
}

pub type Result<T> = std::result::Result<T, Error>;
