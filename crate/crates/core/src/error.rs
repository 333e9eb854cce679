//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator index (i={i}, s={s}) out of range for n={n}, p={p}")]
    IndexOutOfRange { n: usize, p: usize, i: usize, s: usize },

    #[error("n={n} is not a valid degree here: {reason}")]
    UnsupportedDegree { n: usize, reason: String },

    #[error("unsupported shape for n={n}, p={p}: {reason}")]
    UnsupportedShape { n: usize, p: usize, reason: String },

    #[error("p={p} is not an odd prime within the configured bound {bound}")]
    BoundExceeded { p: usize, bound: usize },

    #[error("{0} is not prime")]
    NotPrime(usize),

    #[error("enumeration exceeded the element cap {cap}")]
    EnumerationBudget { cap: usize },

    #[error("permutation is not a member of the group: {reason}")]
    NotAMember { reason: String },

    #[error("operands live over different variable lists or rings")]
    RingMismatch,

    #[error("denominator vanished during {context}")]
    DenominatorVanishes { context: String },

    #[error("no non-singular evaluation point found after {attempts} seeded attempts")]
    EvaluationSingular { attempts: usize },

    #[error("term count {terms} exceeded the size cap {cap}; aborting instead of thrashing")]
    SizeLimit { terms: usize, cap: usize },

    #[error("division by zero rational function")]
    DivisionByZero,

    #[error("unsupported operation: {0}")]
    UnsupportedOperation(String),

    #[error("check '{check}' failed: {witness}")]
    CheckFailed { check: String, witness: String },

    #[error("certificate is malformed: {0}")]
    MalformedCertificate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
