//! Error types shared across the crate.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// Tensor or vector shapes do not line up; names the offending axis.
    #[error("dimension mismatch in {op}: axis {axis} expects {expected}, got {got}")]
    Dimension {
        op: &'static str,
        axis: &'static str,
        expected: usize,
        got: usize,
    },

    /// Invalid input that is not a pure shape problem (empty sequence,
    /// bit count not divisible by the symbol size, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// An operation was called out of order, e.g. backward before forward.
    #[error("invalid state: {0}")]
    State(String),

    /// Bad experiment configuration (missing checkpoint, unknown receiver, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A linear-algebra routine failed (singular system, non-finite values).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Training diverged; the per-epoch loss history is attached.
    #[error("training diverged: {message}")]
    Training { message: String, history: Vec<f64> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn dimension(
        op: &'static str,
        axis: &'static str,
        expected: usize,
        got: usize,
    ) -> Self {
        Error::Dimension {
            op,
            axis,
            expected,
            got,
        }
    }
}
