use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("qubit {0} appears more than once among targets and controls")]
    DuplicateQubit(usize),
    #[error("gate of arity {arity} applied to {targets} targets")]
    ArityMismatch { arity: usize, targets: usize },
    #[error("gate is not unitary (max deviation {0:e})")]
    NonUnitary(f64),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("{0} qubits exceeds the dense simulator limit")]
    TooManyQubits(usize),
    #[error("invalid oracle: {0}")]
    InvalidOracle(String),
    #[error("oracle encoding {found} cannot be used here, expected {expected}")]
    WrongEncoding { expected: &'static str, found: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
