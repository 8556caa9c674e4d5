use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular at pivot {index}")]
    Singular { index: usize },

    #[error("QR iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("argument outside the supported domain: {0}")]
    Domain(String),

    #[error("could not bracket eigenvalue {index} in lambda range [{lo}, {hi}]")]
    Bracket { index: usize, lo: f64, hi: f64 },

    #[error("found only {} of {wanted} eigenvalues below k_max = {k_max}", found.len())]
    InsufficientRange {
        wanted: usize,
        k_max: f64,
        found: Vec<f64>,
    },

    #[error("invalid refractive index: {0}")]
    InvalidIndex(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("solver fault: {0}")]
    SolverFault(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("feature {index} has zero variance")]
    DegenerateFeature { index: usize },

    #[error("R² undefined: output {output} has zero total variance")]
    UndefinedScore { output: usize },

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
