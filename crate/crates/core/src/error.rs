use thiserror::Error;

/// Errors raised by body construction and the numerical solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("zero direction passed to a support query")]
    ZeroDirection,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("origin is not strictly interior; translate the body before taking its polar")]
    OriginNotInterior,
    #[error("affine map is singular (|det L| = {det:e})")]
    SingularMap { det: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("{what} did not converge (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },
    #[error("point is not interior to the body")]
    NotInterior,
    #[error("line does not meet the body")]
    LineMissesBody,
    #[error("chord endpoints coincide")]
    CoincidentPoints,
    #[error("{what}: size {size} exceeds limit {limit}")]
    LimitExceeded { what: &'static str, size: usize, limit: usize },
    #[error("vertex list is not a minimal V-representation: {0}")]
    NotMinimal(String),
    #[error("infeasible: {0} (residual {1:e})")]
    Infeasible(String, f64),
    #[error("weights must sum to 1 (sum = {0})")]
    InvalidWeights(f64),
    #[error("Monte Carlo standard error {stderr:e} exceeds {limit:e}; increase the sample count")]
    MonteCarloVariance { stderr: f64, limit: f64 },
    #[error("no dual zero found on a {grid}-point grid; refine the grid")]
    NoDualZero { grid: usize },
    #[error("inconsistent fixed-point system (residual {0:e}); check the group tolerance")]
    EmptyFixedSpace(f64),
}

pub type Result<T> = std::result::Result<T, GeomError>;
