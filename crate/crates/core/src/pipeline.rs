//! The three-step prediction chain: threshold filtering, linear
//! discriminant, and discriminant-to-probability calibration, packaged
//! as one trainable and serializable model.
//!
//! Rows rejected by the filter are assigned probability zero, and the
//! calibration scale is solved over the *whole* training set under that
//! masking, so the expected event count implied by the model matches
//! the number of observed positive cases in the training data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ddf::{apply_filter, FilterModel, FilterModelFile};
use crate::error::{Error, Result};
use crate::lda::{self, CalibrationMap, LdaModel};
use crate::metrics::{aggregate_folds, FoldStats, MetricsReport};
use crate::tabular::{Dataset, FoldPlan};

/// A calibrated discriminant model together with the filter that gates
/// its predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineModel {
    pub lda: LdaModel,
    pub filter: Option<FilterModel>,
}

/// One row's model output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub discriminant: f64,
    pub probability: f64,
    /// False when the filter rejected the row.
    pub selected: bool,
}

/// Portable model form. The discriminant fields sit at the top level;
/// the filter and any provenance the caller attaches ride alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModelFile {
    #[serde(flatten)]
    pub lda: LdaModel,
    pub filter: Option<FilterModelFile>,
    /// Opaque run metadata echoed by writers; ignored by the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl PipelineModel {
    pub fn to_file(&self, provenance: Option<serde_json::Value>) -> PipelineModelFile {
        PipelineModelFile {
            lda: self.lda.clone(),
            filter: self.filter.as_ref().map(FilterModel::to_file),
            provenance,
        }
    }
}

impl PipelineModelFile {
    /// Validates the model and binds the filter rules to the model's
    /// predictor order.
    pub fn into_model(self) -> Result<PipelineModel> {
        self.lda.validate()?;
        let filter = match self.filter {
            Some(f) => Some(f.bind(&self.lda.predictor_names)?),
            None => None,
        };
        Ok(PipelineModel {
            lda: self.lda,
            filter,
        })
    }
}

fn fit_masked(
    ds: &Dataset,
    mask: &[u8],
    filter: Option<FilterModel>,
    regularization: f64,
    n_bins: usize,
) -> Result<PipelineModel> {
    let fitted = ds.select(mask)?;
    if fitted.n_positives() == 0 || fitted.n_negatives() == 0 {
        return Err(Error::PostFilterSingleClass(format!(
            "{} positives and {} negatives survive",
            fitted.n_positives(),
            fitted.n_negatives()
        )));
    }
    let model = lda::fit_lda(&fitted, regularization)?;

    // calibration knots come from the filtered population the
    // discriminant was fit on
    let discs: Vec<f64> = (0..fitted.n_samples())
        .map(|i| lda::discriminant(&model, fitted.row(i)))
        .collect::<Result<_>>()?;
    let knots = lda::fit_knots(&discs, fitted.labels(), n_bins);
    let cal = CalibrationMap { knots, scale: 1.0 };

    // the scale is solved over the whole training set with rejected rows
    // pinned at zero, so the implied event count matches every observed
    // positive, not just the ones surviving the filter
    let raw: Vec<f64> = (0..ds.n_samples())
        .map(|i| {
            if mask[i] == 1 {
                lda::discriminant(&model, ds.row(i)).map(|d| cal.raw(d))
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<_>>()?;
    let base_rate = ds.n_positives() as f64 / ds.n_samples() as f64;
    let scale = lda::solve_scale(&raw, base_rate);

    let mut lda_model = model;
    lda_model.calibration = Some(CalibrationMap {
        knots: cal.knots,
        scale,
    });
    Ok(PipelineModel {
        lda: lda_model,
        filter,
    })
}

/// Trains the chain on a dataset: applies the filter (all rows pass when
/// `None`), fits the discriminant on the survivors, and calibrates so
/// the mean predicted probability over `ds` equals its base rate.
pub fn train(
    ds: &Dataset,
    filter: Option<&FilterModel>,
    regularization: f64,
    n_bins: usize,
) -> Result<PipelineModel> {
    let mask = match filter {
        Some(f) => apply_filter(f, ds)?,
        None => vec![1u8; ds.n_samples()],
    };
    fit_masked(ds, &mask, filter.cloned(), regularization, n_bins)
}

/// Random-undersampling baseline: keeps every positive plus a seeded
/// sample of negatives (`ratio` negatives per positive), fits the
/// discriminant and knots on that subset, then recalibrates the scale on
/// the full training set. No filter is attached, so every row is
/// selected at prediction time.
pub fn train_undersampled(
    ds: &Dataset,
    ratio: f64,
    seed: u64,
    regularization: f64,
    n_bins: usize,
) -> Result<PipelineModel> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::Config(format!(
            "undersample ratio {ratio} must be positive and finite"
        )));
    }
    let n_pos = ds.n_positives();
    let n_neg = ds.n_negatives();
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedRate(
            "undersampling needs both classes present".into(),
        ));
    }
    let keep_neg = (((n_pos as f64) * ratio).round() as usize).clamp(1, n_neg);
    let neg_indices: Vec<usize> = (0..ds.n_samples())
        .filter(|&i| ds.labels()[i] == 0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled = rand::seq::index::sample(&mut rng, neg_indices.len(), keep_neg);

    let mut mask = vec![0u8; ds.n_samples()];
    for (m, &label) in mask.iter_mut().zip(ds.labels()) {
        if label == 1 {
            *m = 1;
        }
    }
    for k in sampled.iter() {
        mask[neg_indices[k]] = 1;
    }

    // subsampling biases the discriminant's training population, but the
    // model itself carries no filter, so the scale must be solved with
    // every row live rather than masked
    let fitted = ds.select(&mask)?;
    let model = lda::fit_lda(&fitted, regularization)?;
    let discs: Vec<f64> = (0..fitted.n_samples())
        .map(|i| lda::discriminant(&model, fitted.row(i)))
        .collect::<Result<_>>()?;
    let knots = lda::fit_knots(&discs, fitted.labels(), n_bins);
    let cal = CalibrationMap { knots, scale: 1.0 };
    let raw: Vec<f64> = (0..ds.n_samples())
        .map(|i| lda::discriminant(&model, ds.row(i)).map(|d| cal.raw(d)))
        .collect::<Result<_>>()?;
    let base_rate = ds.n_positives() as f64 / ds.n_samples() as f64;
    let scale = lda::solve_scale(&raw, base_rate);
    let mut lda_model = model;
    lda_model.calibration = Some(CalibrationMap {
        knots: cal.knots,
        scale,
    });
    Ok(PipelineModel {
        lda: lda_model,
        filter: None,
    })
}

/// Predicts one row given in the model's predictor order.
pub fn predict_row(m: &PipelineModel, row: &[f64]) -> Result<Prediction> {
    let discriminant = lda::discriminant(&m.lda, row)?;
    if let Some(f) = &m.filter {
        if let Some(rule) = f.rules.iter().find(|r| r.predictor_index >= row.len()) {
            return Err(Error::Shape(format!(
                "filter rule '{}' indexes column {} but the row has {} values",
                rule.predictor_name,
                rule.predictor_index,
                row.len()
            )));
        }
    }
    let selected = match &m.filter {
        Some(f) => f.rules.iter().all(|r| {
            let v = row[r.predictor_index];
            v > r.tau_min && v < r.tau_max
        }),
        None => true,
    };
    let probability = if selected {
        lda::predict_probability(&m.lda, row)?
    } else {
        0.0
    };
    Ok(Prediction {
        discriminant,
        probability,
        selected,
    })
}

/// Predicts rows already gathered in the model's predictor order.
pub fn predict_matrix(m: &PipelineModel, rows: &[Vec<f64>]) -> Result<Vec<Prediction>> {
    rows.iter().map(|r| predict_row(m, r)).collect()
}

/// Predicts every row of a dataset, matching the model's predictors to
/// the dataset's columns by name.
pub fn predict_dataset(m: &PipelineModel, ds: &Dataset) -> Result<Vec<Prediction>> {
    let mut cols = Vec::with_capacity(m.lda.predictor_names.len());
    for name in &m.lda.predictor_names {
        let idx = ds.predictor_index(name).ok_or_else(|| {
            Error::Schema(format!("predictor column '{name}' not found in data"))
        })?;
        cols.push(idx);
    }
    let mut out = Vec::with_capacity(ds.n_samples());
    let mut row = vec![0.0f64; cols.len()];
    for i in 0..ds.n_samples() {
        for (slot, &c) in row.iter_mut().zip(&cols) {
            *slot = ds.value(i, c);
        }
        out.push(predict_row(m, &row)?);
    }
    Ok(out)
}

/// How to retrain the chain inside each fold of a cross-validated
/// evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainRecipe {
    /// Learn a threshold filter on the fit rows, then train behind it.
    Ddf {
        ddf: crate::ddf::DdfConfig,
        regularization: f64,
        n_bins: usize,
    },
    /// Discriminant and calibration only.
    Plain { regularization: f64, n_bins: usize },
    /// Random negative undersampling before the discriminant.
    Undersample {
        ratio: f64,
        seed: u64,
        regularization: f64,
        n_bins: usize,
    },
}

fn train_recipe(fit: &Dataset, recipe: &TrainRecipe, fold: usize) -> Result<PipelineModel> {
    match recipe {
        TrainRecipe::Ddf {
            ddf,
            regularization,
            n_bins,
        } => {
            let filter = crate::ddf::select_sequential(fit, ddf)?;
            train(fit, Some(&filter), *regularization, *n_bins)
        }
        TrainRecipe::Plain {
            regularization,
            n_bins,
        } => train(fit, None, *regularization, *n_bins),
        TrainRecipe::Undersample {
            ratio,
            seed,
            regularization,
            n_bins,
        } => train_undersampled(
            fit,
            *ratio,
            seed.wrapping_add(fold as u64),
            *regularization,
            *n_bins,
        ),
    }
}

/// Result of retraining and scoring the chain on every usable fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldEvaluation {
    pub reports: Vec<MetricsReport>,
    pub excluded_folds: Vec<usize>,
    pub stats: FoldStats,
}

/// Retrains per fold on the fit rows and evaluates on the eval rows at
/// the given probability threshold. Folds whose fit rows cannot be
/// trained on, or whose eval rows contain a single class, are excluded
/// with a warning.
pub fn evaluate_folds(
    ds: &Dataset,
    plan: &FoldPlan,
    recipe: &TrainRecipe,
    threshold: f64,
    reliability_bins: usize,
) -> Result<FoldEvaluation> {
    plan.validate(ds)?;
    let mut reports = Vec::new();
    let mut excluded_folds = Vec::new();
    for (k, fold) in plan.folds.iter().enumerate() {
        let fit = ds.subset(&fold.fit);
        let eval = ds.subset(&fold.eval);
        if eval.n_positives() == 0 || eval.n_negatives() == 0 {
            log::warn!("fold {k} excluded: eval rows contain a single class");
            excluded_folds.push(k);
            continue;
        }
        let model = match train_recipe(&fit, recipe, k) {
            Ok(m) => m,
            Err(
                e @ (Error::PostFilterSingleClass(_)
                | Error::UndefinedRate(_)
                | Error::InsufficientPositives(_)),
            ) => {
                log::warn!("fold {k} excluded: {e}");
                excluded_folds.push(k);
                continue;
            }
            Err(e) => return Err(e),
        };
        let probs: Vec<f64> = predict_dataset(&model, &eval)?
            .iter()
            .map(|p| p.probability)
            .collect();
        reports.push(MetricsReport::from_probabilities(
            &probs,
            eval.labels(),
            threshold,
            reliability_bins,
        )?);
    }
    if reports.is_empty() {
        return Err(Error::Partition(
            "every fold was excluded; nothing to evaluate".into(),
        ));
    }
    let stats = aggregate_folds(&reports)?;
    Ok(FoldEvaluation {
        reports,
        excluded_folds,
        stats,
    })
}
