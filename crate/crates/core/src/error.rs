use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the detection toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("density evaluation failed at x = {x}: outside the common support")]
    Density { x: f64 },

    #[error("no analytic KL divergence for this density pair; use numeric integration")]
    NoAnalyticKl,

    #[error("threshold h = {h} admits no positive root of tanh(eta) = 2 eta / h (need h > 2)")]
    NoPositiveRoot { h: f64 },

    #[error("root bracket [{lo}, {hi}] does not change sign")]
    Bracket { lo: f64, hi: f64 },

    #[error("survival series did not reach tolerance at t = {t} within {terms} terms; increase K")]
    IncreaseK { t: f64, terms: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("convergence failure: {0}")]
    Convergence(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Csv(_) => 2,
            Error::Convergence(_) | Error::IncreaseK { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
