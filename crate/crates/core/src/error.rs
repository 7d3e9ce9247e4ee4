use std::io;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a precondition (shape, range, arity).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed (singular system, non-finite loss).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A binary container could not be decoded.
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: usize, msg: String },

    /// A text input (CSV, config) could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
