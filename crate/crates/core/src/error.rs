use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("qubit {0} appears more than once in a gate or qubit list")]
    DuplicateQubit(usize),

    #[error("gate {gate} expects {expected} target(s), got {got}")]
    TargetArity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("width mismatch: {what} has {got} entries, expected {expected}")]
    WidthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("qubit list must not be empty")]
    EmptyQubitList,

    #[error("amplitude vector of length {0} is not a power of two")]
    BadDimension(usize),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("counting outcome {j} out of range for a {t}-qubit register")]
    OutcomeOutOfRange { j: u64, t: u32 },

    #[error("simulation needs {required} qubits, cap is {available}")]
    QubitCapExceeded { required: usize, available: usize },

    #[error("work qubits left excited after an oracle call (leakage {0:.3e})")]
    WorkQubitLeakage(f64),

    #[error("{party} touched qubit {qubit} owned by {owner}")]
    OwnershipViolation {
        party: String,
        owner: String,
        qubit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
