use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index {index} out of range (available: {available})")]
    Range { index: usize, available: usize },

    #[error("index {index} outside the support of the distribution")]
    OutsideSupport { index: i64 },

    #[error("sequence declared non-negative but term {index} is {value}")]
    NegativeTerm { index: usize, value: f64 },

    #[error("row {row}: {reason}")]
    Validation { row: usize, reason: String },

    #[error("no convergence after {squarings} squarings (last residual {last_residual:e})")]
    NonConvergence {
        squarings: usize,
        last_residual: f64,
    },

    #[error("input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } => 3,
            Error::Precondition(_) => 1,
            _ => 2,
        }
    }
}
