use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field exponent must be at least 1")]
    InvalidExponent,
    #[error("field order {order} exceeds the limit {limit}")]
    FieldTooLarge { order: u128, limit: u64 },
    #[error("element does not belong to F_{q}")]
    ForeignElement { q: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero polynomial not allowed here")]
    ZeroPolynomial,
    #[error("constant polynomial not allowed here")]
    ConstantPolynomial,
    #[error("inputs are not coprime")]
    NotCoprime,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("enumeration of {projected} cells exceeds budget {budget}")]
    BudgetExceeded { projected: u128, budget: u64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
