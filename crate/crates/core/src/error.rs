use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("cannot normalize: {0}")]
    DegenerateInput(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("feature value {value} at position {index} is outside [0, 1]")]
    FeatureOutOfRange { index: usize, value: f64 },

    #[error("probability vector sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("probability vector has invalid entry {value} at position {index}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("hypothesis set is empty")]
    EmptyHypothesisSet,

    #[error("hypotheses {first} and {second} have identical weights")]
    DuplicateHypothesis { first: usize, second: usize },

    #[error("option set needs at least 2 options, got {0}")]
    TooFewOptions(usize),

    #[error("option set has {options} options but {texts} texts")]
    TextCountMismatch { options: usize, texts: usize },

    #[error("chosen index {index} out of range for {k} options")]
    ChoiceOutOfRange { index: usize, k: usize },

    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
