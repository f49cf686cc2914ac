use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrand evaluation failed: {0}")]
    Integrand(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("spectrum does not cover {needed} (computed up to {covered})")]
    Coverage { needed: f64, covered: f64 },
    #[error("lattice enumeration needs {needed} points, budget is {budget}")]
    Budget { needed: u64, budget: u64 },
    #[error("empty spectral window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("index {index} out of range (size {size})")]
    Index { index: usize, size: usize },
}
