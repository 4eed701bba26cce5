use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |h - h^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("invalid index set {0:?}")]
    BadIndexSet(Vec<usize>),

    #[error("Kraus operators are not trace preserving (max |sum K^dagger K - I| = {0:e})")]
    NotTracePreserving(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("mixing parameter {0} outside [0, 1]")]
    BadMixingParameter(f64),

    #[error("damping parameter {0} outside [0, 1]")]
    BadGamma(f64),

    #[error("matrix is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("invalid Schmidt weights: {0}")]
    BadWeights(String),

    #[error("invalid block indices ({i}, {j}) for local dimension {d}")]
    BadIndices { i: usize, j: usize, d: usize },

    #[error("unknown witness family `{0}`")]
    UnknownFamily(String),

    #[error("tolerances must be strictly positive")]
    BadTolerance,

    #[error("invalid subsystem dimensions {d_a}x{d_b} (each must be at least 2)")]
    BadDims { d_a: usize, d_b: usize },

    #[error("invalid sweep configuration: {0}")]
    BadConfig(String),

    #[error("could not start worker pool: {0}")]
    ThreadPool(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
