use thiserror::Error;

/// Errors surfaced by metric certification, prox evaluation and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {deviation:e} exceeds 1e-12"
    )]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue:e} <= 0")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("eigenvalue {eigenvalue} outside [{lo}, {hi}] required by the bound m = {hi}")]
    EigenvalueOutOfRange { eigenvalue: f64, lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter {name}: {value} ({constraint})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error(
        "inner solver did not reach tolerance: residual {residual:e} after {iterations} iterations"
    )]
    InnerSolverDiverged { residual: f64, iterations: usize },

    #[error(
        "no usable oracle for prox of `{func}`: no analytic formula for this metric, and {reason}"
    )]
    MissingOracles { func: String, reason: &'static str },

    #[error("linear system for the quadratic prox broke down")]
    SingularSystem,

    #[error("smoothing parameters not admissible for sandwich bounds: lambda = {lambda} < m^2 * mu = {threshold}")]
    NotAdmissible { lambda: f64, threshold: f64 },

    #[error("solver configuration rejected: {0}")]
    AdmissibilityViolation(String),

    #[error("grid oracle limited to dim <= 2, got {0}")]
    DimensionTooLarge(usize),

    #[error("unknown validation suite `{0}`")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
