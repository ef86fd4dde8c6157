use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("boxes {first} and {second} overlap with interior volume {volume:e}")]
    OverlappingBoxes {
        first: usize,
        second: usize,
        volume: f64,
    },

    #[error("feature index {feature} out of range for dimension {dimension}")]
    FeatureOutOfRange { feature: usize, dimension: usize },

    #[error("invalid probability pair ({p0}, {p1})")]
    InvalidProbability { p0: f64, p1: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dataset has no minority samples")]
    NoMinority,

    #[error("cannot build {folds} stratified folds: smallest class has {min_class} samples")]
    TooManyFolds { folds: usize, min_class: usize },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: row {row}: unknown class label {label:?}")]
    UnknownClass {
        path: PathBuf,
        row: usize,
        label: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("model: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
