use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },

    #[error("single-class dataset")]
    SingleClass,

    #[error("too few samples ({0})")]
    TooFewSamples(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("feature index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("feature {0} is already selected")]
    DuplicateIndex(usize),

    #[error("invalid group plan: {0}")]
    InvalidPlan(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("negative scatter accumulator: {0}")]
    NegativeAccumulator(f64),

    #[error("labels are not binary ({0} classes)")]
    NotBinary(usize),

    #[error("accuracy stop requested without a validation split")]
    MissingValidation,

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for problems with the request itself (parameters, plans,
    /// algorithm names) as opposed to the data it points at.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Self::InvalidPlan(_)
                | Self::InvalidParameter(_)
                | Self::UnknownAlgorithm(_)
                | Self::MissingValidation
                | Self::DuplicateIndex(_)
                | Self::IndexOutOfRange { .. }
        )
    }
}
