use thiserror::Error;

/// Errors raised by the game engine, layouts and strategies.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("color {color} out of range for k = {k}")]
    ColorOutOfRange { color: u8, k: u8 },

    #[error("layout is infeasible: {0}")]
    InfeasibleLayout(String),

    #[error("layout corruption: {0}")]
    LayoutCorruption(String),

    #[error("enumeration budget exceeded: {candidates} candidates > budget {budget}")]
    EnumerationBudget { candidates: u128, budget: u64 },

    #[error("strategy contract violation: {0}")]
    ContractViolation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn corrupt(msg: impl Into<String>) -> Error {
    Error::LayoutCorruption(msg.into())
}
