use crate::levy::ConditionReport;

/// Errors surfaced by the library. The CLI maps each variant to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("hypothesis not satisfied: {condition}")]
    Refused {
        condition: String,
        reports: Vec<ConditionReport>,
    },

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io(_) | Error::Unsupported(_) => 1,
            Error::Refused { .. } => 2,
            Error::NonConvergence(_) => 3,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
