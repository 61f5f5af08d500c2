use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge on {region} (estimate {estimate:e}, error {error:e})")]
    QuadratureDivergence {
        region: String,
        estimate: f64,
        error: f64,
    },

    #[error("cannot classify the tail integral of {0}")]
    UndecidableTail(String),

    #[error("unsupported constraint variant for {0}")]
    UnsupportedVariant(String),

    #[error("iteration did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("an immediate arbitrage opportunity is present in the admissible cone: {xi:?}")]
    IaoPresent { xi: Vec<f64> },

    #[error("exponential tilt is not integrable: {0}")]
    TiltNotIntegrable(String),

    #[error("completeness requires an unconstrained market")]
    ConstrainedMarket,

    #[error("vector is not an immediate arbitrage opportunity: {0}")]
    NotAnIao(String),

    #[error("covariance matrix is not positive semidefinite")]
    CholeskyFailure,

    #[error("wealth became non-positive on path {path} at t={time}")]
    NonPositiveWealth { path: usize, time: f64 },

    #[error("wealth path {path} decreased at t={time}")]
    MonotonicityViolation { path: usize, time: f64 },

    #[error("horizon cap {horizon} reached with hit fraction {hit_fraction}")]
    HorizonCapReached { horizon: f64, hit_fraction: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("spec file error: {0}")]
    Schema(String),
}
