//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by configuration validation and protocol operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is structurally invalid (rejected before any computation).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument is outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Local base classification was requested inside the ill-defined cut region.
    #[error("base {base} lies in the ill-defined cut region for anchor {anchor}")]
    IllDefinedCut { base: u32, anchor: u32 },

    /// Two streams that must be equally long are not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
