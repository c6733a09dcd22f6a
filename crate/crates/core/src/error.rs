use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} {value} out of range (allowed {min}..={max})")]
    Range {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("illegal character {found:?} at offset {offset}")]
    Parse { offset: usize, found: char },
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Protocol(&'static str),
    #[error("{0}")]
    InvalidTree(String),
    #[error("{0}")]
    Refused(String),
    #[error("{0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Range { .. } => "range",
            Error::Parse { .. } => "parse",
            Error::Domain(_) => "domain",
            Error::Protocol(_) => "protocol",
            Error::InvalidTree(_) => "invalid-tree",
            Error::Refused(_) => "refused",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
