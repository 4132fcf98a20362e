use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its valid domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A mathematical function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A chip pair other than (1,0) or (0,1) was found.
    #[error("invalid code pair ({0},{1}) at symbol {2}")]
    InvalidCode(u8, u8, usize),

    /// A chip or sample sequence cannot be split into halves.
    #[error("framing error: {0}")]
    Framing(String),

    /// A detector could not be trained from the supplied observations.
    #[error("training error: {0}")]
    Training(String),

    /// An experiment configuration is inconsistent.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
