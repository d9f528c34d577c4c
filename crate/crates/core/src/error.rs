//! Error taxonomy shared by every module.
//!
//! Validation errors carry the name of the violated constraint in their
//! `Display` output so the CLI can report it verbatim.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombinatoricsError {
    #[error("NonFinite: argument {0} is not a finite real")]
    NonFinite(f64),
    #[error("OrderTooLarge: order {order} exceeds the limit {limit}")]
    OrderTooLarge { order: u64, limit: u64 },
    #[error("Overflow: result exceeds the double-precision range")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("LengthError: need at least two weights, got {0}")]
    LengthError(usize),
    #[error("NonFinite: weight {index} is not finite")]
    NonFinite { index: usize },
    #[error("ZeroTotal: weights sum to zero")]
    ZeroTotal,
    #[error("SignViolation: weight {index} has C_i/N <= 0")]
    SignViolation { index: usize },
    #[error(
        "DrawCountViolation: draw count {draws} does not satisfy (n-1)/N < 1 with N = {total}"
    )]
    DrawCountViolation { draws: u32, total: f64 },
    #[error("GammaViolation: gamma = {gamma} does not satisfy C_0/N > (gamma-1)/N")]
    GammaViolation { gamma: u32 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error("DimensionMismatch: expected {expected} entries, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("VarianceUndefined: N = 1 makes the variance denominator vanish")]
    VarianceUndefined { means: Vec<f64> },
    #[error("TailEpsilonZeroOnInfiniteSupport: N < 0 gives an infinite support, tail epsilon must be positive")]
    TailEpsilonZeroOnInfiniteSupport,
    #[error("InvalidTailEpsilon: tail epsilon {0} is outside [0, 1)")]
    InvalidTailEpsilon(f64),
    #[error("EnumerationBudgetExceeded: more than {0} tuples enumerated before reaching the requested mass")]
    EnumerationBudgetExceeded(usize),
    #[error("StepCapExceeded: a trial ran for more than {0} draws")]
    StepCapExceeded(u64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UrnError {
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("InvalidUrn: {0}")]
    InvalidUrn(String),
    #[error("ScaleTooSmall: a_scale {a_scale} must exceed N/C_{index} = {bound}")]
    ScaleTooSmall {
        a_scale: u64,
        index: usize,
        bound: f64,
    },
    #[error("NonPositiveBallCount: color {index} gets {count} balls at this scale")]
    NonPositiveBallCount { index: usize, count: i64 },
    #[error("InfeasibleTotal: a + (n-1)c = {value} is not positive")]
    InfeasibleTotal { value: i64 },
    #[error("InfeasibleColorZero: a_0 + c(gamma-1) = {value} is not positive")]
    InfeasibleColorZero { value: i64 },
    #[error("DimensionMismatch: expected {expected} entries, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("StepCapExceeded: a trial ran for more than {0} draws")]
    StepCapExceeded(u64),
    #[error("StabilizationFailed: support did not stabilize below a_scale = {0}")]
    StabilizationFailed(u64),
}

impl From<ValidationError> for UrnError {
    fn from(e: ValidationError) -> Self {
        UrnError::Distribution(e.into())
    }
}

impl From<CombinatoricsError> for UrnError {
    fn from(e: CombinatoricsError) -> Self {
        UrnError::Distribution(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Urn(#[from] UrnError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(
        "InsufficientTrials: {trials} trials for a support of {support} tuples (need {required})"
    )]
    InsufficientTrials {
        trials: usize,
        support: usize,
        required: usize,
    },
    #[error("Unsupported: {0}")]
    Unsupported(&'static str),
    #[error("InvalidTolerance: {0}")]
    InvalidTolerance(f64),
}

impl From<ValidationError> for OracleError {
    fn from(e: ValidationError) -> Self {
        OracleError::Distribution(e.into())
    }
}

impl From<CombinatoricsError> for OracleError {
    fn from(e: CombinatoricsError) -> Self {
        OracleError::Distribution(e.into())
    }
}
