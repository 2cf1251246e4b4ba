use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid input distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid decoding metric: {0}")]
    InvalidMetric(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Every input symbol scores zero at output `y`.
    #[error("metric column for output {y} is identically zero")]
    DegenerateColumn { y: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid rate: {0}")]
    InvalidRate(String),

    #[error("objective is -inf at every (rho, theta): metric is incompatible with the channel support")]
    IncompatibleMetric,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergent { iterations: usize, residual: f64 },

    #[error("fixed-point iterate left the positive orthant at input {x}")]
    NonPositive { x: usize },

    #[error("optimal metric misses the constant-composition exponent by {gap:e}")]
    SaturationFailure { gap: f64 },

    #[error("restarts of a convex solve disagree by {spread:e}")]
    SolverDisagreement { spread: f64 },

    #[error("problem too large for exhaustive evaluation: {0}")]
    DimensionTooLarge(String),

    #[error("size cap violated: {0}")]
    CapViolation(String),

    #[error("composition is not an exact type for block length {n}: n*P_X({x}) = {value}")]
    NonIntegralComposition { n: usize, x: usize, value: f64 },

    #[error("every codeword has a zero-metric position")]
    AllScoresInfinite,

    #[error("exponent is not monotone in rate for metric '{metric}' near R = {rate}")]
    NotMonotone { metric: String, rate: f64 },

    #[error("metric '{metric}' at R = {rate}: {source}")]
    CurvePoint {
        metric: String,
        rate: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    File { path: String, message: String },
}

impl Error {
    /// True for failures of an iterative numerical procedure.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergent { .. }
            | Error::NonPositive { .. }
            | Error::SaturationFailure { .. }
            | Error::SolverDisagreement { .. }
            | Error::NotMonotone { .. }
            | Error::IncompatibleMetric => true,
            Error::CurvePoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub fn is_cap_violation(&self) -> bool {
        match self {
            Error::CapViolation(_) | Error::DimensionTooLarge(_) => true,
            Error::CurvePoint { source, .. } => source.is_cap_violation(),
            _ => false,
        }
    }
}
