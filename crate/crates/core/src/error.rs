use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// `Validation` covers bad user input (exit code 2 in the CLI); every other
/// variant is a numerical failure (exit code 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuctionError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("ODE denominator 1 + c'(s - b)v = {denominator:.3e} collapsed at v = {v}")]
    SingularDenominator { v: f64, denominator: f64 },

    #[error("Dutch bid curve decreased at v = {v} (b fell from {from} to {to})")]
    NonMonotone { v: f64, from: f64, to: f64 },

    #[error("root finder failed: {0}")]
    RootNotBracketed(String),

    #[error("{what} = {value} lies outside the solved domain [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

impl AuctionError {
    pub fn is_validation(&self) -> bool {
        matches!(self, AuctionError::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, AuctionError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(AuctionError::Validation(msg.into()))
}
