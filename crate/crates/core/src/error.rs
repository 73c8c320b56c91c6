use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree {requested} exceeds truncation degree {max}")]
    DegreeOutOfRange { requested: u32, max: u32 },

    #[error("multinomial coefficient of {alpha:?} does not fit in 128 bits")]
    CapacityExceeded { alpha: Vec<u32> },

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no sign change of {family} found in (0, 1)")]
    NoRoot { family: String },

    #[error("unknown theorem tag `{0}`")]
    UnknownTag(String),

    #[error("tag `{tag}` does not support {operation}")]
    UnsupportedTag { tag: String, operation: &'static str },
}
