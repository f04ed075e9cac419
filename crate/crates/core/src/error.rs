use thiserror::Error;

/// Errors raised by the solvers, checkers and document parsers.
///
/// `Input` covers anything the caller handed in wrong (bad indices, malformed
/// documents, enumeration bounds). `Logic` means an internal invariant broke
/// and the caller's state should be considered corrupted.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Logic(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn logic(msg: impl Into<String>) -> Self {
        Error::Logic(msg.into())
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
