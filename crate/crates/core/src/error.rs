use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by factorizations, solvers, generators and matrix I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch in {op}: expected {expected}, got {got}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// Zero or subnormal diagonal in a triangular solve (0-based index).
    #[error("singular triangular factor: diagonal {index} is zero or subnormal")]
    Singular { index: usize },

    /// Diagonal entry below the rank threshold `n * eps * |R(0,0)|` (0-based index).
    #[error("numerically rank deficient at diagonal {index} (|r| = {value:e}, threshold {threshold:e})")]
    RankDeficient {
        index: usize,
        value: f64,
        threshold: f64,
    },

    #[error("Jacobi SVD did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(op: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch {
            op,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// True for failures caused by the numerics rather than the input shape or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::RankDeficient { .. } | Error::Convergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
