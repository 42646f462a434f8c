//! Engine-wide error type.
//!
//! Structural misuse (mismatched contexts, wrong leg counts) panics via
//! assertions; everything a caller can plausibly recover from or needs to
//! report, notably truncation-window exhaustion, comes through [`Error`].

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// A generated term would influence in-window data but lies outside the
    /// declared truncation window, so the computation cannot be trusted.
    #[error("window exhaustion: {0}")]
    WindowExhausted(String),

    /// Negative powers were requested of a form whose leading variable cannot
    /// absorb them.
    #[error("cannot expand negative powers with leading term {0}")]
    BadLeading(String),

    /// Exact division failed (a coefficient was not divisible as claimed).
    #[error("inexact division: {0}")]
    InexactDivision(String),

    /// A fixed generator basis was too small to close a linear system.
    #[error("basis bound too small: {0}")]
    BasisBound(String),

    /// A verifier was invoked with parameters outside its domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
