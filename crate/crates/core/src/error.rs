use thiserror::Error;

/// Errors raised by objectives, schedules, the descent loop and the audits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid f_star metadata: f(x) - f_star = {gap:e}")]
    InvalidFStar { gap: f64 },

    #[error("nondifferentiable point: distance {distance:e} to a kink is below {required:e}")]
    NonDifferentiable { distance: f64, required: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("f_star is not a lower bound: f(x) - f_star = {gap:e}")]
    FStarNotLowerBound { gap: f64 },

    #[error("f_tilde exceeds observed value: f(x) - f_tilde = {gap:e}")]
    FTildeExceedsValue { gap: f64 },

    #[error("at iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("gamma must lie in (0, 1], got {0}")]
    InvalidGamma(f64),

    #[error("trajectory record {t} is missing `{field}`")]
    MissingField { t: usize, field: &'static str },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// The underlying error with any iteration context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }
}
