use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is numerically singular (smallest singular value {sigma_min:e}, threshold {threshold:e})")]
    SingularMatrix { sigma_min: f64, threshold: f64 },
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid grid spacing omega = {0:e}")]
    InvalidOmega(f64),
    #[error("grid line {index} is a boundary line; one half would be empty")]
    EmptyHalf { index: u64 },
    #[error("pseudospectrum is unbounded: eps = {eps:e} >= sigma_min(B) = {sigma_min:e}")]
    UnboundedPseudospectrum { eps: f64, sigma_min: f64 },
    #[error("degenerate projective point <0, 0>")]
    DegeneratePoint,
    #[error("k = {k} outside [1, {n}]")]
    InvalidK { k: usize, n: usize },
    #[error("no admissible split for a subproblem of size {m} after {lines_checked} grid lines")]
    NoSplitFound { m: usize, lines_checked: usize },
    #[error("parameter {0} underflows to zero in double precision; use practical mode")]
    ParameterUnderflow(&'static str),
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dense kernel failed to converge in {0}")]
    NoConvergence(&'static str),
}
