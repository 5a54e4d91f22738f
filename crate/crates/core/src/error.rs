use thiserror::Error;

/// Errors raised by the synthesis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sequential not supported: {latches} latch(es) present")]
    Sequential { latches: usize },

    #[error("node {node}: {message}")]
    Construction { node: usize, message: String },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("{vars} variables exceed the limit of {max}")]
    TooManyVariables { vars: usize, max: usize },

    #[error("{qubits} qubits exceed the simulator limit of {max}")]
    TooManyQubits { qubits: usize, max: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("illegal pebbling strategy at move {index}: {message}")]
    IllegalStrategy { index: usize, message: String },

    #[error("invalid schedule at step {step}: {message}")]
    Schedule { step: usize, message: String },

    #[error("function is not a parity function")]
    NotParity,

    #[error("pebbling failed: {0}")]
    Pebbling(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
