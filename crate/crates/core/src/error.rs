use thiserror::Error;

/// Errors produced across ingestion, dissection, fitting and generation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("price must be positive and finite, got {0}")]
    NonPositivePrice(f64),

    #[error("threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time went backwards: {current} ms after {previous} ms")]
    TimeRegression { previous: i64, current: i64 },

    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },

    #[error("line {line}: time went backwards: {current} ms after {previous} ms")]
    TimeRegressionAt { line: u64, previous: i64, current: i64 },

    #[error("insufficient events: {0}")]
    InsufficientEvents(String),

    #[error("insufficient tail: {found} samples at or above x_min, need at least {required}")]
    InsufficientTail { found: usize, required: usize },

    #[error("underdetermined fit: need at least 2 distinct x values, got {0}")]
    Underdetermined(usize),

    #[error("degenerate exponent {0:e}: scale constant is undefined")]
    DegenerateExponent(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by too little data to estimate anything.
    pub fn is_insufficient(&self) -> bool {
        matches!(
            self,
            Error::InsufficientEvents(_)
                | Error::InsufficientTail { .. }
                | Error::Underdetermined(_)
                | Error::DegenerateExponent(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
