use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero degree at node {0}")]
    ZeroDegree(usize),

    #[error("weight matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),

    #[error("invalid weight {value} at ({row}, {col}): weights must be finite and nonnegative")]
    InvalidWeight { row: usize, col: usize, value: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("point {index} lies outside the admissible box |x|_inf <= {bound}")]
    OutsideBox { index: usize, bound: f64 },

    #[error("eigensolver did not converge after {matvecs} matrix-vector products (worst residual {worst_residual:.3e})")]
    NotConverged {
        matvecs: usize,
        residuals: Vec<f64>,
        worst_residual: f64,
    },

    #[error("operator is not positive definite: Ritz value {0:.3e}")]
    NotPositiveDefinite(f64),

    #[error("dense fallback requested for n = {n} above the limit {limit}; use p = 1 or p < 0")]
    DenseLimit { n: usize, limit: usize },

    #[error("non-finite iterate at Allen-Cahn iteration {0}")]
    Diverged(usize),

    #[error("SBM generation failed: {0}")]
    Sbm(String),

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical pipeline (as opposed to input or I/O problems).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroDegree(_)
                | Error::NonFinite(_)
                | Error::NotConverged { .. }
                | Error::NotPositiveDefinite(_)
                | Error::DenseLimit { .. }
                | Error::Diverged(_)
                | Error::Sbm(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Image(_) | Error::Csv(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
