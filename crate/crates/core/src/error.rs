use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),

    #[error("division by zero in Q(zeta_{0})")]
    DivisionByZero(u32),

    #[error("invalid lens space: {0}")]
    InvalidLens(String),

    #[error("l = {l} is outside the valid range 1..={max} for q = {q}")]
    LengthIndexOutOfRange { l: u32, q: u32, max: u32 },

    #[error("class index {0} out of range ({1} classes)")]
    ClassIndexOutOfRange(usize, usize),

    #[error("operation requires a winding-0 component, got winding {0}")]
    IteratedComponent(u32),

    #[error("length is a multiple of the flow period; use the full-length formula")]
    FullLength,

    #[error("{0} is not an odd prime")]
    NotOddPrime(u32),

    #[error("sample point is not on the adapted subsphere (residual {0:e})")]
    OffSubsphere(f64),

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("rank is indeterminate: singular value {0:e} lies in the inconclusive band")]
    IndeterminateRank(f64),

    #[error("multiplicity k = {k} is not an integer (residual {residual:e})")]
    NonIntegral { k: usize, residual: f64 },

    #[error("cutoff K = {given} too small for epsilon = {epsilon}; need K >= {required}")]
    InsufficientCutoff {
        given: usize,
        required: usize,
        epsilon: f64,
    },

    #[error("invalid Bieberbach data: {0}")]
    InvalidBieberbach(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
