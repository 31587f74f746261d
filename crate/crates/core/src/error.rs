use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
    #[error("resolvent is degenerate for {label}: collides with {colliding} (gap {gap:.3e}, coupling {coupling:.3e})")]
    Degenerate { label: String, colliding: String, gap: f64, coupling: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
