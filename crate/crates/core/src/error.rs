use thiserror::Error;

/// Errors raised by the geometric, numerical and exact routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid quadric coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("point lies outside the chart domain (|x'| = {norm}, radius {radius})")]
    OutsideDomain { norm: f64, radius: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("slice at t = {t} leaves the chart ball")]
    SliceEscapesChart { t: f64 },

    #[error("boundary root finding failed at angle {angle}")]
    RootFinding { angle: f64 },

    #[error("profile contains non-positive values")]
    NonPositiveProfile,

    #[error("too few samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },

    #[error("ill-conditioned least-squares system (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    #[error("oscillation unresolved within budget (achieved error {achieved:e})")]
    UnresolvedOscillation { achieved: f64 },

    #[error("taylor data missing or too short (need degree {needed}, have {have:?})")]
    MissingTaylor { needed: u32, have: Option<u32> },

    #[error("polynomial is not homogeneous of degree {degree}")]
    NotHomogeneous { degree: u32 },

    #[error("contact hypothesis violated: m = {m} must exceed 4")]
    HypothesisViolated { m: u32 },

    #[error("hessian at the origin is not normalized: {0}")]
    HessianNotNormalized(String),

    #[error("chart radius {radius} too small for the requested radius ladder")]
    ChartRadiusTooSmall { radius: f64 },

    #[error("unsupported dimension {0} for this operation")]
    UnsupportedDimension(usize),

    #[error("computation cancelled")]
    Cancelled,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
