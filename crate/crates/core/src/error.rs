use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("prior {prior} lies outside the interval [{lo}, {hi}]")]
    PriorOutsideInterval { prior: f64, lo: f64, hi: f64 },
    #[error("non-finite sample value at index {0}")]
    NonFinite(usize),
    #[error("experiment-dependent cost requires the sender distribution")]
    MissingSenderDistribution,
    #[error("distribution mean {mean} does not match prior {prior}")]
    NotBayesPlausible { mean: f64, prior: f64 },
    #[error("out of region: {0}")]
    OutOfRegion(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
