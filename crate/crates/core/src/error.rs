use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("support sizes differ: {left} vs {right}")]
    SupportMismatch { left: usize, right: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("lattice needs {needed} bins, cap is {cap}")]
    LatticeOverflow { needed: usize, cap: usize },
    #[error("enumeration size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("maximizer is not unique: {0}")]
    NonUniqueMaximizer(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
