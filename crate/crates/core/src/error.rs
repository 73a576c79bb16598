use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid network: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular (pivot {pivot:e} at index {index})")]
    SingularMatrix { index: usize, pivot: f64 },

    #[error("constraint matrix is rank deficient (rank {rank} < {rows})")]
    RankDeficient { rank: usize, rows: usize },

    #[error("eigenvalue {eigenvalue:e} quantizes to zero with {work_bits} work bits")]
    ZeroQuantizedEigenvalue { eigenvalue: f64, work_bits: u32 },

    #[error("post-selection probability {probability:e} is below the success floor")]
    NonConvergent { probability: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no strictly interior starting point: {0}")]
    InfeasibleStart(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_check(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{what}: expected {expected}, got {got}")))
    }
}
