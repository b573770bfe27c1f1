use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("lambda sequence must be strictly decreasing and positive")]
    NonMonotoneLambda,

    #[error("statevector of {qubits} qubits exceeds the {max}-qubit limit")]
    StatevectorTooLarge { qubits: usize, max: usize },

    #[error("invalid measurement plan: {0}")]
    InvalidPlan(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    /// The record has (numerically) zero probability; `step` is 1-based.
    #[error("record is impossible at step {step}: {reason}")]
    ImpossibleRecord { step: usize, reason: String },

    #[error("jump with vanishing rate {rate:e}")]
    ImpossibleJump { rate: f64 },

    #[error("filter denominator {value:e} underflowed; the time step is too large")]
    DenominatorUnderflow { value: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
