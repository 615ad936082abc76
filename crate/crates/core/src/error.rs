use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} needs {needed:.3e} steps, over the budget of {budget}")]
    Budget {
        what: String,
        needed: f64,
        budget: u64,
    },
    #[error("measure undefined at zero of Z: {0}")]
    ZeroPartition(String),
    #[error("undefined conditional measure: {0}")]
    Undefined(String),
    #[error("root refinement did not converge: {0}")]
    NonConvergence(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInstance(msg.into())
    }
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
    pub(crate) fn budget(what: impl Into<String>, needed: f64, budget: u64) -> Self {
        Error::Budget {
            what: what.into(),
            needed,
            budget,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
