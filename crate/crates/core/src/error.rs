use crate::solver::{RewardVector, SolveReport};
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown alternative id: {0}")]
    UnknownId(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Every unordered pair must be observed at least once before an
    /// empirical win-rate matrix can be formed.
    #[error("incomplete pair coverage: {} unobserved pair(s), e.g. {:?}", .missing.len(), .missing.first())]
    IncompleteCoverage { missing: Vec<(String, String)> },

    /// The solver hit its iteration budget before reaching the gradient
    /// tolerance. Carries the best iterate found.
    #[error(
        "solver did not converge after {} iterations (gradient sup-norm {:.3e})",
        .0.report.iterations,
        .0.report.grad_sup_norm
    )]
    NonConvergence(Box<NonConvergence>),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Best iterate and its report, attached to [`Error::NonConvergence`].
#[derive(Debug, Clone)]
pub struct NonConvergence {
    pub rewards: RewardVector,
    pub report: SolveReport,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::Parse(format!("csv error: {other:?}")),
            }
        } else {
            Error::Parse(format!("csv error: {err}"))
        }
    }
}
