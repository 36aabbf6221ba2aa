use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: expected (L={expected_length}, N={expected_n}), got (L={length}, N={n})")]
    GridMismatch {
        expected_length: f64,
        expected_n: usize,
        length: f64,
        n: usize,
    },

    #[error("dense routine rejected: dimension {n} exceeds cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("scale stack too small: 2^{j_max} < {half_length} (half the grid length)")]
    StackTooSmall { j_max: u32, half_length: f64 },

    #[error("bump tabulation failed: truncation bound {bound:e} exceeds {limit:e}")]
    Tabulation { bound: f64, limit: f64 },

    #[error("unknown set family `{0}`")]
    UnknownFamily(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
