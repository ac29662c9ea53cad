use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported del Pezzo degree {0} (expected 1..=7)")]
    UnsupportedDegree(u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("point {point} out of range for degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("group order {order} exceeds enumeration cap {cap}")]
    Capacity { order: String, cap: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field size {size} exceeds cap {cap}")]
    FieldTooLarge { size: u64, cap: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements from different fields")]
    FieldMismatch,
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("not smooth or bad reduction: {0}")]
    NotSmoothOrBadReduction(String),
    #[error("bad place: {0}")]
    BadPlace(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("permutation does not preserve the incidence graph")]
    NotIncidencePreserving,
}
