use thiserror::Error;

/// Errors produced anywhere in the construction, decoding and simulation
/// pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("extension degree {0} outside the supported range 2..=16")]
    DegreeOutOfRange(u32),
    #[error("polynomial {poly:#x} is not primitive for degree {p}")]
    NonPrimitivePolynomial { p: u32, poly: u32 },
    #[error("division by zero in GF(2^p)")]
    DivisionByZero,
    #[error("invalid QC parameters: {0}")]
    InvalidParams(String),
    #[error("row {m_prime} of H_D does not close a single 2L-cycle in H_C: {reason}")]
    NotACycle { m_prime: usize, reason: String },
    #[error("cycle closure violated for row {0} of H_Delta")]
    ClosureViolation(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("binary expansion is not orthogonal")]
    OrthogonalityBroken,
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("map is singular over GF(2)")]
    SingularMap,
    #[error("message length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite message in decoder at iteration {0}")]
    NonFiniteMessage(usize),
    #[error("value outside the valid domain: {0}")]
    DomainError(String),
    #[error("solution space has no non-trivial point")]
    TrivialOnly,
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
