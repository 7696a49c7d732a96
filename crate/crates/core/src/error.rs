use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register too large: {0} qubits (maximum {max})", max = crate::qsim::MAX_QUBITS)]
    RegisterTooLarge(usize),
    #[error("register must hold at least one qubit")]
    EmptyRegister,
    #[error("invalid qubit support {support:?} for a {num_qubits}-qubit register")]
    BadSupport { support: Vec<usize>, num_qubits: usize },
    #[error("matrix is not unitary (max |U^dag U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("parameter count mismatch: circuit has {expected}, got {actual}")]
    ParamCount { expected: usize, actual: usize },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("observable is not Hermitian (max imaginary coefficient {0:e})")]
    NotHermitian(f64),
    #[error("metric factorization failed after regularization {0:e}")]
    Factorization(f64),
    #[error("optimization diverged at depth {layers}, iteration {iteration}")]
    Diverged { layers: usize, iteration: usize },
    #[error("{0} did not converge: {1}")]
    NoConvergence(&'static str, String),
    #[error("{0} too large for dense mode: {1} qubits")]
    TooLargeForDense(&'static str, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
