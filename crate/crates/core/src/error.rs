use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "Hermitian eigensolver did not converge (dim {dim}, max |a_ij| {max_abs:.3e}, \
         hermitian defect {hermitian_defect:.3e})"
    )]
    Eigen {
        dim: usize,
        max_abs: f64,
        hermitian_defect: f64,
    },

    #[error("autocorrelation rank {rank} is below the required signal rank {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn dim(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            got,
        }
    }
}
