use thiserror::Error;

/// Errors raised by configuration checks, formulas, solvers and generators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IpcError {
    /// A configuration value violates one of the algorithm's admissibility conditions.
    #[error("invalid configuration: {0}")]
    Validation(String),

    /// A closed-form formula was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The caller reached a quotient that is only defined away from stationary points.
    #[error("stationary point reached: {0}")]
    StationaryPoint(String),

    /// The backtracking line search used its whole evaluation budget.
    #[error(
        "line search stalled after {evals} gradient evaluations (last trial step {last_step:e})"
    )]
    LineSearchStall { evals: usize, last_step: f64 },

    /// An invariant that the theory guarantees was violated; usually a broken oracle.
    #[error("internal error: {0}")]
    Internal(String),

    /// An iterate left the region where the objective is defined.
    #[error("iterate left the objective's domain at k={k}: {detail}")]
    DomainViolation { k: usize, detail: String },

    #[error("fixed-point iteration did not converge in {iters} steps (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("oracle has no known solution")]
    MissingSolution,

    #[error("unsupported oracle: {0}")]
    UnsupportedOracle(String),

    #[error("malformed problem file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, IpcError>;
