use thiserror::Error;

use crate::solver::PicardReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge within {max_terms} terms (last term {last_term:e})")]
    SeriesNonConvergence { max_terms: usize, last_term: f64 },

    #[error("resolvent series diverges: term ratio estimate {ratio:.4} after {terms} terms")]
    ResolventDivergence { terms: usize, ratio: f64 },

    #[error("Picard iteration did not reach tolerance in segment {segment} after {} iterations", report.iterations)]
    PicardNonConvergence { segment: usize, report: Box<PicardReport> },

    #[error("regression failed: {0}")]
    Regression(String),

    #[error("{failed} of {total} Monte Carlo paths failed (first: {first})")]
    MonteCarlo { failed: usize, total: usize, first: String },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
