use thiserror::Error;

/// Errors produced by the solvers and geometry pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ODE step size underflow at theta = {theta}: {reason}")]
    OdeStepUnderflow { theta: f64, reason: String },

    #[error("no zero of u_{m} in (0, pi) for lambda = {lambda}")]
    NoZeroInRange { m: u32, lambda: f64 },

    #[error("root bracket exhausted: {0}")]
    BracketExhausted(String),

    #[error("root finder failed to converge: {0}")]
    NoConvergence(String),

    #[error("mismatched grids: {0}")]
    GridMismatch(String),

    #[error("mesh is degenerate: {0}")]
    DegenerateMesh(String),

    #[error("mesh not contained in an open hemisphere (max pole angle {max_angle} rad)")]
    HemisphereViolation { max_angle: f64 },

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("center-of-mass iteration did not converge after {iterations} iterations (best |w(y)-y| = {best_gap})")]
    CenterOfMassNonConvergence { iterations: usize, best_gap: f64 },

    #[error(
        "comparison profile crosses the ball eigenfunction {count} times; \
         a valid first-eigenfunction profile crosses at most once"
    )]
    MultipleCrossings { count: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
