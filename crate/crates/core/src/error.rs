use thiserror::Error;

/// Errors raised by the numerical kernels and the decomposition methods.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch, left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("invalid shape {rows}x{cols}: {reason}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error(
        "matrix is not symmetric: max asymmetry {max_asymmetry:e} exceeds tolerance {tolerance:e}"
    )]
    NotSymmetric { max_asymmetry: f64, tolerance: f64 },

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is undefined for a zero matrix")]
    ZeroMatrix(&'static str),
}

pub type Result<T> = std::result::Result<T, LinalgError>;
