use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("expected coprime integers p > q > 0, got p={p}, q={q}")]
    InvalidPair { p: BigInt, q: BigInt },

    #[error("continued fraction value is undefined: numerator and denominator both vanish")]
    UndefinedValue,

    #[error("empty sequence: {0}")]
    EmptySequence(&'static str),

    #[error("entry {value} at position {index} is below the required bound {bound}")]
    EntryTooSmall { index: usize, value: i64, bound: i64 },

    #[error("continued fraction entry does not fit in 64 bits")]
    EntryOverflow,

    #[error("polygon must have at least 3 vertices, got {0}")]
    PolygonTooSmall(usize),

    #[error("sequence {k:?} is not an admissible sequence representing zero")]
    NotZeroSequence { k: Vec<i64> },

    #[error("sequence {k:?} is not bounded entrywise by {a:?}")]
    NotBounded { k: Vec<i64>, a: Vec<i64> },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("polynomial division is not exact: {0}")]
    InexactDivision(String),

    #[error("degree cap exceeded: degree {degree} > cap {cap}")]
    DegreeCapExceeded { degree: u64, cap: u64 },

    #[error("oracle limit exceeded: p={p} > limit {limit}")]
    OracleLimit { p: BigInt, limit: u64 },

    #[error("identity check failed: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
