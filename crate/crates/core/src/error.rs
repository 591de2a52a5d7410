use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into three families (see [`ErrorKind`]): invalid input
/// relative to the mathematical domain, numeric procedures that could not
/// reach their target, and resource limits.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NonCoprimeBases({0},{1}): bases at positions {0} and {1} share a common factor")]
    NonCoprimeBases(usize, usize),
    #[error("BaseTooSmall: base {base} at position {index} is less than 2")]
    BaseTooSmall { index: usize, base: u64 },
    #[error("TooFewBases: need at least 2 bases, got {0}")]
    TooFewBases(usize),
    #[error("DigitBoundTooSmall: digit bound must be at least 2, got {0}")]
    DigitBoundTooSmall(u32),
    #[error("UnsortedBases: bases must be strictly increasing (position {0})")]
    UnsortedBases(usize),
    #[error("InvalidDigit: digit {digit} is outside 1..={max}")]
    InvalidDigit { digit: u32, max: u32 },
    #[error("InvalidRepresentation: {0}")]
    InvalidRepresentation(String),
    #[error("LimitOverflow: {0}")]
    LimitOverflow(String),
    #[error("DomainError: {0}")]
    Domain(String),
    #[error("WrongArity: operation requires exactly {expected} bases, system has {actual}")]
    WrongArity { expected: usize, actual: usize },
    #[error("OracleLimitExceeded: n = {n} exceeds the brute-force limit {limit}")]
    OracleLimitExceeded { n: u64, limit: u64 },
    #[error("ToleranceUnreachable: {0}")]
    ToleranceUnreachable(String),
    #[error("BracketFailure: {0}")]
    BracketFailure(String),
    #[error("LimitExceeded: n = {n} exceeds the {what} limit {limit}")]
    LimitExceeded { what: &'static str, n: u64, limit: u64 },
    #[error("OutOfMemory: table needs {requested} bytes, limit is {limit}")]
    OutOfMemory { requested: u64, limit: u64 },
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Numeric,
    Resource,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ToleranceUnreachable(_) | Error::BracketFailure(_) => ErrorKind::Numeric,
            Error::OutOfMemory { .. } | Error::OracleLimitExceeded { .. } | Error::LimitExceeded { .. } => ErrorKind::Resource,
            _ => ErrorKind::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
