use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed triangular range: lo={lo}, hi={hi} (need lo >= 1 and hi >= lo-1)")]
    MalformedRange { lo: u64, hi: u64 },
    #[error("triangular sum out of range: lo={lo}, hi={hi}")]
    RangeTooLarge { lo: u64, hi: u64 },
    #[error("zero base with negative exponent")]
    ZeroToNegativePower,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar from {token:?}: {reason}")]
    ParseScalar { token: String, reason: &'static str },
    #[error("weight must satisfy |w|>1 (got |w|^2 = {abs_sq})")]
    WeightNotExpanding { abs_sq: String },
    #[error("magnitude base must exceed 1 (got {got})")]
    BaseNotExpanding { got: String },
    #[error("exponent must satisfy p >= 1 (got {got})")]
    InvalidExponent { got: String },
    #[error("negative value where a nonnegative one is required: {what}")]
    NegativeValue { what: &'static str },
    #[error("cannot take an even root of a negative number")]
    NegativeRoot,
    #[error("field mismatch: {what}")]
    FieldMismatch { what: &'static str },
    #[error("the zero sequence has no last nonzero entry")]
    ZeroSequence,
    #[error("empty seed")]
    EmptySeed,
    #[error("period {period} is shorter than the target support {support}")]
    PeriodTooShort { period: u64, support: u64 },
    #[error("decay certificate issued for |w|^2 = {cert} but operator has |w|^2 = {op}")]
    CertWeightMismatch { cert: String, op: String },
    #[error("decay certificate violated at index {index}")]
    CertViolation { index: u64 },
    #[error("invalid decay certificate: {reason}")]
    InvalidCertificate { reason: &'static str },
    #[error("schedule index {index} out of range (depth {depth})")]
    ScheduleIndex { index: u64, depth: u64 },
    #[error("schedule conditions violated for pair j={j}, m={m}")]
    ScheduleInvalid { j: u64, m: u64 },
    #[error("enumeration index must be >= 1")]
    EnumerationIndex,
    #[error("bound must be positive (got {got})")]
    NonPositiveBound { got: String },
    #[error("computation exceeds depth limit {limit}")]
    DepthLimit { limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
