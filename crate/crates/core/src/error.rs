use std::io;

use thiserror::Error;

/// Errors produced by the unitbpe library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// A line of an input file could not be parsed. Line numbers are 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Data parsed correctly but violates a vocabulary or table invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller broke an operation's precondition (bad sizes, missing boundary, ...).
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
