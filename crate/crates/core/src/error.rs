use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected dim={expected}, got dim={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("value count {values} is not a multiple of dimension {d}")]
    RaggedMatrix { values: usize, d: usize },

    #[error("point set must contain at least one point")]
    EmptyPoints,

    #[error("center set must contain at least one center")]
    EmptyCenters,

    #[error("dimension must be >= 1")]
    ZeroDimension,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("subset must be non-empty")]
    EmptySubset,

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("label count {labels} does not match point count {points}")]
    LengthMismatch { labels: usize, points: usize },

    #[error("label {label} at point {index} is out of range for k={k}")]
    LabelOutOfRange { index: usize, label: usize, k: usize },

    #[error("point {index} is unlabeled but this algorithm needs complete labels")]
    MissingLabel { index: usize },

    #[error("every label was deleted; no center can be estimated")]
    AllLabelsDeleted,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("syntax error in {what}: {reason}")]
    Syntax { what: &'static str, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
