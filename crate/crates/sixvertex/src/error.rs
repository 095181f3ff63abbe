//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or operator dimensions do not match the operation's contract.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A dense object would exceed the configured dimension cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A site or entry index lies outside the valid range.
    #[error("index out of range: {0}")]
    Index(String),

    /// An input sits on (or too close to) a pole or outside a function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A construction produced a degenerate object (zero vector, vanishing operator).
    #[error("degenerate result: {0}")]
    Degenerate(String),

    /// Configuration parsing or validation failed.
    #[error("config error: {0}")]
    Config(String),

    /// Command-line usage error.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
