//! Rare-event classification toolkit.
//!
//! The crate covers the pieces of a filter-then-discriminate pipeline
//! for binary problems with extreme class imbalance, plus the tooling
//! for judging how faithfully a study reproduces another:
//!
//! - [`tabular`]: dataset model, CSV I/O, forward-chaining temporal
//!   folds, and a synthetic imbalanced-data generator.
//! - [`ddf`]: data-driven filtering: interpretable per-predictor
//!   thresholds learned from positive-class quantiles and selected
//!   sequentially by a weighted FAR+FNR score.
//! - [`lda`]: closed-form two-class linear discriminant analysis with a
//!   monotone discriminant-to-probability calibration.
//! - [`metrics`]: confusion-matrix scores, MCC, Brier score,
//!   reliability curves, ROC AUC, and cross-fold aggregation.
//! - [`pipeline`]: the filter -> discriminant -> calibration chain as a
//!   single trainable, serializable model.
//! - [`repro`]: the two-axis reproduction/replication scorecard with
//!   questionnaire scoring, trajectories, and SVG diagrams.

pub mod ddf;
pub mod error;
pub mod lda;
pub mod metrics;
pub mod pipeline;
pub mod repro;
pub mod tabular;

pub use error::{Error, Result};
