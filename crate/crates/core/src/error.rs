use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{a} is not invertible modulo {n}")]
    NotInvertible { a: u64, n: u64 },

    #[error("m not coprime to n (m = {m}, n = {n})")]
    NotCoprime { m: u64, n: u64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unsupported sigma order {0}: only integers and 1/2 are supported")]
    UnsupportedSigmaOrder(String),

    #[error("{what} guard exceeded: {actual} > {limit}")]
    GuardExceeded {
        what: &'static str,
        limit: u128,
        actual: u128,
    },

    #[error("character-sum estimate lost precision (residual {residual})")]
    PrecisionLoss { residual: f64 },
}
