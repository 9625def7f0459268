use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty flip sequence")]
    EmptySequence,

    /// `position` is 1-based.
    #[error("invalid character {found:?} at position {position}, expected 'H' or 'T'")]
    Parse { position: usize, found: char },

    #[error("{0}")]
    Domain(String),

    #[error("{what}: requested {requested}, limit is {limit}")]
    Resource {
        what: &'static str,
        requested: usize,
        limit: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
