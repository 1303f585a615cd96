use thiserror::Error;

/// Failure kinds surfaced by every fallible operation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Invalid input or a violated precondition.
    #[error("{0}")]
    Domain(String),
    /// An enumeration would exceed its configured cap.
    #[error("{what} needs {size} items, above the cap of {cap}")]
    Resource { what: String, size: u128, cap: u128 },
    /// Malformed JSON or rational text.
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    /// Bad command-line request, such as an unknown fixture name.
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn resource(what: impl Into<String>, size: u128, cap: u128) -> Self {
        Error::Resource {
            what: what.into(),
            size,
            cap,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
