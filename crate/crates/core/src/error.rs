use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate node family: degree must be at least 1")]
    DegenerateFamily,

    #[error("nodes must be strictly increasing (violated at index {index})")]
    NotIncreasing { index: usize },

    #[error("repeated node at indices {left} and {right}")]
    RepeatedNode { left: usize, right: usize },

    #[error("weight {index} is zero")]
    ZeroWeight { index: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for degree {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("interval [{lo}, {hi}] does not contain a node strictly inside it")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("endpoint condition violated at node {index}: {reason}")]
    EndpointCondition { index: usize, reason: &'static str },

    #[error("denominator vanishes: pole in [{left}, {right}]")]
    Pole { left: f64, right: f64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no valid samples for n = {n}")]
    NoSamples { n: usize },

    #[error("output failed: {0}")]
    Output(String),
}
