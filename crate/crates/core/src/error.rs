use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: polyharmonic order must be >= 1, got {0}")]
    InvalidDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimates {coarse} and {fine} differ")]
    QuadratureNonConvergence { coarse: f64, fine: f64 },

    #[error("newton iteration failed after {iterations} iterations (residual {residual:.3e})")]
    NewtonFailure {
        iterations: usize,
        residual: f64,
        /// Last iterate: nodal values followed by lambda.
        last_iterate: Vec<f64>,
    },

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("extraction stopped after {0} points without meeting the threshold")]
    TooManyPoints(usize),

    #[error("comparison ball leaves the domain (boundary ratio {ratio:.3}, need {needed:.3})")]
    BallExitsDomain { ratio: f64, needed: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("inconsistent report: {0}")]
    Inconsistent(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("checkpoint parse error at line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
