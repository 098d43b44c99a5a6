use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-invertible generator (smallest singular value {sigma_min:e})")]
    NonInvertible { sigma_min: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("eigenvalue iteration failed to converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("no spectral gap at index {index} (ratio {ratio})")]
    NoSpectralGap { index: usize, ratio: f64 },

    #[error("rank overflow: subspace ranks sum to {total} in dimension {dim}")]
    RankOverflow { total: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ball too large: {size} elements exceeds cap {cap}")]
    BallTooLarge { size: usize, cap: usize },

    #[error("generator label sets differ ({left} vs {right} generators)")]
    LabelMismatch { left: usize, right: usize },

    #[error("not in SU(2,1): form residual {residual:e}")]
    NotSu21 { residual: f64 },

    #[error("flag nesting violated: {0}")]
    NestingViolated(String),

    #[error("no infinite-order witness in the ball")]
    NoWitness,

    #[error("overflow while iterating matrix powers at step {step}")]
    Overflow { step: usize },

    #[error("no proximal elements found in the ball")]
    NoProximal,

    #[error("too few points: need {needed}, found {found}; {hint}")]
    TooFewPoints { needed: usize, found: usize, hint: &'static str },

    #[error("transversality failure: {0}")]
    NotTransverse(String),

    #[error("point lies on the hyperplane at infinity of the chart")]
    AtInfinity,

    #[error("matrix is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
