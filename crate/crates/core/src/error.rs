use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid action {action}: expected a server index in 0..{servers}")]
    InvalidAction { action: usize, servers: usize },
    #[error("contract violation: {0}")]
    Contract(&'static str),
    #[error("layout mismatch: {0}")]
    Layout(String),
    #[error("non-finite value in {context} (at index {index})")]
    NonFinite { context: &'static str, index: usize },
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("rollout buffer full (capacity {0})")]
    BufferFull(usize),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
