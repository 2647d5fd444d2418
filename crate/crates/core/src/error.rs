use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is singular or numerically degenerate")]
    Singular,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entry ({row}, {col}) = {value} is not strictly positive")]
    NotPositive { row: usize, col: usize, value: f64 },

    #[error("input has a negative entry at index {index}: {value}")]
    NegativeInput { index: usize, value: f64 },

    #[error("input must be strictly positive, entry {index} is {value}")]
    NonPositiveInput { index: usize, value: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("rate vector is infeasible: spectral value {value} exceeds 1 + {tol:e}")]
    Infeasible { value: f64, tol: f64 },

    #[error("degenerate channel for user {user}: empirical mean of h^H v is zero")]
    DegenerateChannel { user: usize },

    #[error("non-positive {field} entry {index} = {value}; instance violates the positivity precondition")]
    NonPositiveEntry {
        field: &'static str,
        index: usize,
        value: f64,
    },

    #[error("invalid initial point: {0}")]
    InvalidInit(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
