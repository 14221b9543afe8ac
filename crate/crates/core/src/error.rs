use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "matrix of size {size} is not positive definite after jitter {jitter:e} \
         (diagonal range [{min_diag:e}, {max_diag:e}])"
    )]
    NotPositiveDefinite {
        size: usize,
        jitter: f64,
        min_diag: f64,
        max_diag: f64,
    },

    #[error("fidelity index {fidelity} out of range for a model with {m} fidelities")]
    FidelityOutOfRange { fidelity: usize, m: usize },

    #[error("coordinate {dim} = {value} outside domain bounds [{lo}, {hi}]")]
    OutOfBounds { dim: usize, value: f64, lo: f64, hi: f64 },

    #[error("unknown problem `{0}` (expected one of: hartmann6, currin2, borehole8, toy1d)")]
    UnknownProblem(String),

    #[error("budget {budget} cannot pay for a single target-fidelity query of cost {target_cost}")]
    InsufficientBudget { budget: f64, target_cost: f64 },

    #[error("candidate set is empty")]
    EmptyCandidates,

    #[error("brute-force enumeration supports at most 20 items, got {0}")]
    TooManyItems(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
