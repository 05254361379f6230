//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset handling, model fitting, and scoring.
#[derive(Debug, Error)]
pub enum Error {
    /// A required column is missing or the schema is inconsistent.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell failed to parse or violated a dataset invariant.
    /// Row and column are reported 1-based as they appear in the file
    /// (row 1 is the first data row after the header).
    #[error("load error at row {row}, column '{column}': {reason}")]
    Load {
        row: usize,
        column: String,
        reason: String,
    },

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// Not enough distinct time values to build the requested folds.
    #[error("partition error: {0}")]
    Partition(String),

    /// Threshold learning needs at least two positive rows.
    #[error("insufficient positives: {0}")]
    InsufficientPositives(String),

    /// The predictor is constant over the positive class, so a nonzero
    /// quantile budget yields an empty threshold interval.
    #[error("degenerate rule: {0}")]
    DegenerateRule(String),

    /// A rate is undefined because the dataset contains a single class.
    #[error("undefined rate: {0}")]
    UndefinedRate(String),

    /// Vector or matrix dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// The pooled covariance is singular; refit with a positive
    /// covariance regularization.
    #[error("singular pooled covariance: {0}; retry with a positive regularization epsilon")]
    SingularCovariance(String),

    /// The model has no calibration map yet.
    #[error("uncalibrated model: {0}")]
    Uncalibrated(String),

    /// Filtering left a single class, so the discriminant cannot be fit.
    #[error("single class after filtering: {0}; consider a larger quantile budget")]
    PostFilterSingleClass(String),

    /// Questionnaire answers failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// A trajectory append is not strictly later than the last entry.
    #[error("timestamp ordering error: {0}")]
    TimestampOrder(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
