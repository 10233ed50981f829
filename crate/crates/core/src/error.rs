use thiserror::Error;

/// Errors raised by the numerical routines and model loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary (max |U^dag U - I| = {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("Fock basis dimension {dim} exceeds the configured cap {cap}")]
    SizeOverflow { dim: u128, cap: usize },

    #[error("Gram matrix has an imaginary part {max_imag:.3e} above tolerance")]
    ComplexGram { max_imag: f64 },

    #[error("states live on different Fock bases")]
    BasisMismatch,

    #[error("projector set is not complete (max |sum P_k - I| = {defect:.3e})")]
    IncompleteSet { defect: f64 },

    #[error("projector {index} is not normalized (|norm^2 - 1| = {defect:.3e})")]
    NotNormalized { index: usize, defect: f64 },

    #[error("limit for outcome {outcome} did not converge (spread {spread:.3e})")]
    LimitNonConvergent { outcome: usize, spread: f64 },

    #[error("finite-difference step too large for outcome {outcome} (P = {probability:.3e})")]
    StepTooLarge { outcome: usize, probability: f64 },

    #[error("weak commutativity violated: max |Im Omega| = {max_imag:.3e}")]
    WeakCommutativityViolated { max_imag: f64 },

    #[error("mixing parameter {mix} cannot keep every probe overlap above threshold")]
    MixInfeasible { mix: f64 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
