use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{what}: estimated size {estimate} exceeds cap {cap}")]
    CapExceeded {
        what: String,
        estimate: u128,
        cap: u128,
    },

    #[error("{what}: work budget of {budget} exhausted")]
    BudgetExceeded { what: String, budget: u64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::InvalidGraph(_) | Error::Parse(_) => 2,
            Error::Json(_) => 2,
            Error::CapExceeded { .. } | Error::BudgetExceeded { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
