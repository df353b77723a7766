use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KerrError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("radius {r} is not outside the horizon r+ = {r_plus}")]
    InsideHorizon { r: f64, r_plus: f64 },

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, KerrError>;
