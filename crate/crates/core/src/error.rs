use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    /// A transition rule produced a state that is not part of the enumerated space.
    #[error("transition rule {rule} from state {source_state} targets {target}, which is not in the state space")]
    MissingTarget {
        source_state: String,
        target: String,
        rule: u8,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("negative transition probability {value:e} at ({row}, {col}) exceeds the clamping threshold")]
    NegativeProbability { row: usize, col: usize, value: f64 },

    #[error("chain is not ergodic: {0}")]
    NotErgodic(&'static str),

    #[error("linear system is singular (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error(
        "{method} did not converge after {iterations} iterations (last difference {last_diff:e})"
    )]
    NotConverged {
        method: &'static str,
        iterations: usize,
        last_diff: f64,
    },

    #[error("residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("effective arrival rate is zero")]
    ZeroThroughput,
}
