use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration file is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// An input value lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A classical bit is inconsistent with every candidate partner value.
    /// Cannot happen on an honest channel; surfaced instead of being decoded.
    #[error("channel corruption: {0}")]
    ChannelCorruption(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
