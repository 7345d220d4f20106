use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("under-resolved interaction: effective range {range:.4e} is below two grid spacings ({two_spacings:.4e})")]
    UnderResolved { range: f64, two_spacings: f64 },
    #[error("field is not normalized: ||u||^2 = {0:.12}")]
    NotNormalized(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("root bracket failure: {0}")]
    Bracket(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
