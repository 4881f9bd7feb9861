use thiserror::Error;

/// Errors raised by the analytic and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("polygamma order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("z = {z} lies outside the CGF strip: {binding}")]
    OutOfStrip { z: f64, binding: String },

    #[error("index error: {0}")]
    Index(String),

    #[error("boundary point: {0}")]
    Boundary(String),

    #[error("singular Hankel matrix: {0}")]
    SingularHankel(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("sample too small: need at least {min}, got {got}")]
    SampleSize { min: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
