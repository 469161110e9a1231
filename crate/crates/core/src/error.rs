use thiserror::Error;

/// Errors produced by the detection and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("snapshot matrix needs at least 2 columns, got {0}")]
    DegenerateInput(usize),

    #[error("leading singular value is zero; nothing to decompose")]
    RankZero,

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("only {0} snapshot(s) available after rank clipping, need at least 3")]
    TooFewSnapshots(usize),

    #[error("ground truth is all-{0}; ROC is undefined")]
    DegenerateGroundTruth(bool),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
