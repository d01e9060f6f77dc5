use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported qubit count {0} (expected 1..=10)")]
    InvalidQubitCount(usize),

    #[error("amplitude vector has length {got}, expected {expected} for {num_qubits} qubits")]
    LengthMismatch {
        num_qubits: usize,
        expected: usize,
        got: usize,
    },

    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("basis index {index} out of range for a {num_qubits}-qubit register")]
    BasisIndexOutOfRange { index: usize, num_qubits: usize },

    #[error("operator choice must be 0 or 1, got {0}")]
    InvalidBit(u8),

    #[error("measured qubits must differ (both are {0})")]
    SameQubit(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid probability distribution: {0}")]
    InvalidProbabilities(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stage game is not a Prisoner's Dilemma")]
    NotPrisonersDilemma,

    #[error("stage-1 payoff pattern is not PD-consistent")]
    PatternNotPd,

    #[error("bimatrix is empty")]
    EmptyBimatrix,

    #[error("second-stage subgame after outcome {outcome} has no pure Nash equilibrium")]
    NoPureEquilibrium { outcome: String },

    #[error("{0}")]
    UnsupportedState(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
