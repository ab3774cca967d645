use thiserror::Error;

/// Errors raised anywhere in the stability pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus out of (0,1): kappa = {0}")]
    ModulusOutOfRange(f64),

    #[error("modulus kappa = {kappa} outside the admissible window [{lo}, {hi}]")]
    ModulusOutsideWindow { kappa: f64, lo: f64, hi: f64 },

    #[error("non-finite argument u = {0}")]
    NonFiniteArgument(f64),

    #[error("degenerate speed: |c| = {0} must be < 1")]
    DegenerateSpeed(f64),

    #[error("invalid parameter combination: {0}")]
    InvalidParameters(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operator contract violated: {0}")]
    Contract(String),

    #[error("kernel degeneracy: {0}")]
    KernelDegeneracy(String),

    #[error("cancellation in closed form: {0}")]
    Cancellation(String),

    #[error("eigensolver failed: {0}")]
    EigenSolver(String),

    #[error("inconclusive rank: {0}")]
    InconclusiveRank(String),

    #[error("routes disagree: {0}")]
    RouteDisagreement(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
