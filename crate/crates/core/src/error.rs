use thiserror::Error;

/// Errors raised anywhere in the model pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// A computation produced or would produce a non-finite or undefined value.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A named entity (scenario, age band, parameter set) does not exist.
    #[error("lookup error: {0}")]
    Lookup(String),
    /// A run configuration could not be parsed or is inconsistent.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
