//! Harness errors and their mapping to process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] randclt_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Exit code for a configuration or usage problem.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for a numerical failure.
pub const EXIT_NUMERIC: i32 = 3;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        use randclt_core::Error as E;
        match self {
            HarnessError::Core(E::Quadrature { .. } | E::NumericInconsistency(_)) => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        }
    }
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Config(msg.into()))
}
