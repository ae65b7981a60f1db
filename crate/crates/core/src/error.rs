use thiserror::Error;

/// Errors produced by the multizeta library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p not prime: {0}")]
    NotPrime(u64),
    #[error("extension degree must be at least 1, got {0}")]
    InvalidDegree(u32),
    #[error("field too large: q = {0} exceeds the table limit")]
    FieldTooLarge(u64),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("nonconvergent evaluation: {0}")]
    NonConvergent(String),
    #[error("lattice denominator cap exceeded: need q^{needed}, cap is q^{cap}")]
    LatticeCap { needed: u32, cap: u32 },
    #[error("enumeration budget exceeded: {count} monics > budget {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("denominator failed to clear for H_{0}")]
    DenominatorNotCleared(usize),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("side condition violated: {0}")]
    SideCondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field mismatch between operands")]
    FieldMismatch,
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
