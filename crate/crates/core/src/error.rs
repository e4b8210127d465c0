use alloc::string::String;

/// Errors raised by constructors and operations of this crate.
///
/// Check failures (a violated identity, a verifier witness) are reported as
/// values, never as errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("time {t} is outside the trajectory horizon {horizon}")]
    OutOfRange { t: usize, horizon: usize },

    #[error("malformed path at index {index}: {detail}")]
    MalformedPath { index: usize, detail: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("probability {value} at site {site}, level {level} is not in [0, 1]")]
    InvalidProbability { site: i64, level: u64, value: f64 },

    #[error("conditioning on {y} right arrows has probability zero")]
    NullConditioning { y: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("environment is not a block permutation (site {site}, block starting at level {level})")]
    NotPermutation { site: i64, level: u64 },

    #[error("environments are not related by favourable swaps (site {site}, block starting at level {level})")]
    NotSwapRelated { site: i64, level: u64 },

    #[error("partition does not fit the window: {0}")]
    PartitionMismatch(String),

    #[error("drift {value} at step {step} on visit {visit} exceeds its bound {bound}")]
    ContractViolation { step: usize, visit: u64, value: f64, bound: f64 },

    #[error("coupling produced a right arrow without its dominating counterpart at site {site}, level {level}")]
    CouplingBroken { site: i64, level: u64 },

    #[error("pair horizons differ: {left} vs {right}")]
    HorizonMismatch { left: usize, right: usize },
}
