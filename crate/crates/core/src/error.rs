use std::io;

use thiserror::Error;

/// Errors raised by the library. The variants map one-to-one onto the
/// process exit codes used by the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or configuration value.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A computation was refused up front because it would exceed a budget.
    #[error("resource refusal: {0}")]
    Resource(String),

    /// An input violated a structural precondition (non-monotone filtration,
    /// mismatched provenance, wrong terminal complex).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed text or JSON input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no crossing in lambda range: {0}")]
    NoCrossing(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Exit code convention shared by every subcommand.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::NoCrossing(_) | Error::Parse { .. } | Error::Json(_) => 2,
            Error::Resource(_) => 3,
            Error::Contract(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
