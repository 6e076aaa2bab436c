use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field modulus {0} exceeds the supported bound")]
    FieldTooLarge(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u32),
    #[error("evaluation point must be nonzero")]
    ZeroPoint,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("bad targets: {0}")]
    BadTargets(String),
    #[error("map is not a bijection")]
    NotBijective,
    #[error("dimension mismatch")]
    DimMismatch,
    #[error("C2 is not contained in C1")]
    NotNested,
    #[error("logical value {0} out of range")]
    BadLogical(u64),
    #[error("state lies outside the correctable radius")]
    OutsideCode,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("gate {0} has no transversal form for this code")]
    NotTransversal(String),
    #[error("input is not a degree-2d code word")]
    BadDegree,
    #[error("gate {0} is not in the code's gate set")]
    ForeignGate(String),
    #[error("non-Clifford gate {0} cannot be frame-propagated")]
    NonClifford(String),
    #[error("empty table")]
    EmptyTable,
    #[error("rate is at or above threshold")]
    AboveThreshold,
    #[error("gate arity {0} exceeds the routing limit of 3")]
    ArityTooHigh(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
