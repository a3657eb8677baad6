use thiserror::Error;

/// Failure modes shared by every module.
///
/// `Input` covers malformed or mismatched data, `Domain` covers
/// mathematically invalid requests (inverting a singular element, taking
/// the root of a non-positive one), and `Unsupported` covers systems whose
/// configuration the requested computation does not handle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GFrameError {
    #[error("input error: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, GFrameError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(GFrameError::Input(msg.into()))
}
