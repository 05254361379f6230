//! Evaluation metrics for imbalanced binary classification: confusion
//! counts, rates, MCC, Brier score, reliability curves, ROC AUC, and
//! cross-fold aggregation.
//!
//! Degenerate cases are total rather than errors: any rate, F1, or MCC
//! whose denominator is zero is defined as 0, which keeps fold
//! aggregation well-defined.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard 2x2 contingency counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl ConfusionMatrix {
    fn tp(&self) -> f64 {
        self.true_positives as f64
    }
    fn fp(&self) -> f64 {
        self.false_positives as f64
    }
    fn tn(&self) -> f64 {
        self.true_negatives as f64
    }
    fn fn_(&self) -> f64 {
        self.false_negatives as f64
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// Derived confusion-matrix rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub hit_rate: f64,
    pub false_alarm_rate: f64,
    pub false_negative_rate: f64,
    pub f1: f64,
    pub mcc: f64,
}

fn validate_binary(v: &[u8], what: &str) -> Result<()> {
    if let Some(i) = v.iter().position(|&x| x > 1) {
        return Err(Error::Validation(format!(
            "{what}[{i}] = {} is not in {{0,1}}",
            v[i]
        )));
    }
    Ok(())
}

/// Counts the 2x2 contingency table of a binary prediction.
pub fn confusion(predicted: &[u8], labels: &[u8]) -> Result<ConfusionMatrix> {
    if predicted.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} labels",
            predicted.len(),
            labels.len()
        )));
    }
    validate_binary(predicted, "predicted")?;
    validate_binary(labels, "labels")?;
    let mut cm = ConfusionMatrix {
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
    };
    for (&p, &y) in predicted.iter().zip(labels) {
        match (y, p) {
            (1, 1) => cm.true_positives += 1,
            (1, 0) => cm.false_negatives += 1,
            (0, 1) => cm.false_positives += 1,
            _ => cm.true_negatives += 1,
        }
    }
    Ok(cm)
}

/// Hit rate, FAR, FNR, F1, and MCC from a confusion matrix. Zero
/// denominators yield 0 for the affected score.
pub fn rates(cm: &ConfusionMatrix) -> Result<Rates> {
    if cm.total() == 0 {
        return Err(Error::UndefinedRate("empty confusion matrix".into()));
    }
    let div = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let hit_rate = div(cm.tp(), cm.tp() + cm.fn_());
    let false_alarm_rate = div(cm.fp(), cm.fp() + cm.tn());
    let false_negative_rate = 1.0 - hit_rate;
    let f1 = div(2.0 * cm.tp(), cm.fp() + cm.fn_() + 2.0 * cm.tp());
    let mcc = {
        let denom_factors = [
            cm.tp() + cm.fp(),
            cm.tp() + cm.fn_(),
            cm.tn() + cm.fp(),
            cm.tn() + cm.fn_(),
        ];
        if denom_factors.contains(&0.0) {
            0.0
        } else {
            (cm.tp() * cm.tn() - cm.fp() * cm.fn_()) / denom_factors.iter().product::<f64>().sqrt()
        }
    };
    Ok(Rates {
        hit_rate,
        false_alarm_rate,
        false_negative_rate,
        f1,
        mcc,
    })
}

fn validate_probs(probs: &[f64], labels: &[u8]) -> Result<()> {
    if probs.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} probabilities vs {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if probs.is_empty() {
        return Err(Error::Shape("empty probability vector".into()));
    }
    if let Some(i) = probs.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Validation(format!(
            "probability[{i}] = {} outside [0, 1]",
            probs[i]
        )));
    }
    validate_binary(labels, "labels")
}

/// Mean squared error of probabilities against binary outcomes.
pub fn brier(probs: &[f64], labels: &[u8]) -> Result<f64> {
    validate_probs(probs, labels)?;
    let sum: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| (p - f64::from(y)).powi(2))
        .sum();
    Ok(sum / probs.len() as f64)
}

/// One equal-width probability bin of a reliability curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub mean_predicted: f64,
    pub observed_frequency: f64,
    pub count: u64,
}

/// Reliability curve over `n_bins` equal-width bins on [0, 1]; only
/// nonempty bins are reported, in bin order.
pub fn reliability(probs: &[f64], labels: &[u8], n_bins: usize) -> Result<Vec<ReliabilityBin>> {
    validate_probs(probs, labels)?;
    if n_bins < 2 {
        return Err(Error::Config(format!("n_bins {n_bins} must be at least 2")));
    }
    let mut sums = vec![0.0f64; n_bins];
    let mut positives = vec![0u64; n_bins];
    let mut counts = vec![0u64; n_bins];
    for (&p, &y) in probs.iter().zip(labels) {
        let b = ((p * n_bins as f64) as usize).min(n_bins - 1);
        sums[b] += p;
        positives[b] += u64::from(y);
        counts[b] += 1;
    }
    Ok((0..n_bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| ReliabilityBin {
            mean_predicted: sums[b] / counts[b] as f64,
            observed_frequency: positives[b] as f64 / counts[b] as f64,
            count: counts[b],
        })
        .collect())
}

/// Probability that a uniformly random positive outranks a uniformly
/// random negative, counting ties as one half (rank formulation).
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    validate_binary(labels, "labels")?;
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedRate(
            "ROC AUC needs both classes present".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    // average ranks over tied score groups
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0; // mean of ranks i+1..=j
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Full report of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub hit_rate: f64,
    pub false_alarm_rate: f64,
    pub false_negative_rate: f64,
    pub f1: f64,
    pub mcc: f64,
    pub brier: f64,
    /// `None` when the labels contain a single class.
    pub roc_auc: Option<f64>,
    pub reliability: Vec<ReliabilityBin>,
    /// Cross-fold mean and spread, present on aggregated reports.
    pub fold_stats: Option<FoldStats>,
}

impl MetricsReport {
    /// Evaluates probabilities against labels, thresholding at
    /// `threshold` (predicted positive iff `p >= threshold`) for the
    /// confusion-matrix scores.
    pub fn from_probabilities(
        probs: &[f64],
        labels: &[u8],
        threshold: f64,
        n_bins: usize,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!(
                "threshold {threshold} outside [0, 1]"
            )));
        }
        validate_probs(probs, labels)?;
        let predicted: Vec<u8> = probs.iter().map(|&p| u8::from(p >= threshold)).collect();
        let cm = confusion(&predicted, labels)?;
        let r = rates(&cm)?;
        let brier = brier(probs, labels)?;
        let reliability = reliability(probs, labels, n_bins)?;
        let roc = match roc_auc(probs, labels) {
            Ok(a) => Some(a),
            Err(Error::UndefinedRate(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            confusion: cm,
            hit_rate: r.hit_rate,
            false_alarm_rate: r.false_alarm_rate,
            false_negative_rate: r.false_negative_rate,
            f1: r.f1,
            mcc: r.mcc,
            brier,
            roc_auc: roc,
            reliability,
            fold_stats: None,
        })
    }
}

/// Mean and sample standard deviation of one metric across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Per-metric cross-fold statistics (scalars only; reliability curves
/// are not aggregated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldStats {
    pub n_folds: usize,
    pub hit_rate: MeanStd,
    pub false_alarm_rate: MeanStd,
    pub false_negative_rate: MeanStd,
    pub f1: MeanStd,
    pub mcc: MeanStd,
    pub brier: MeanStd,
    /// Present only when every fold had a defined AUC.
    pub roc_auc: Option<MeanStd>,
}

/// Aggregates scalar metrics over per-fold reports: mean and sample
/// standard deviation (0 for a single fold).
pub fn aggregate_folds(reports: &[MetricsReport]) -> Result<FoldStats> {
    if reports.is_empty() {
        return Err(Error::Config("no reports to aggregate".into()));
    }
    let stat = |f: &dyn Fn(&MetricsReport) -> f64| {
        let values: Vec<f64> = reports.iter().map(f).collect();
        let (mean, std) = crate::ddf::mean_and_std(&values);
        MeanStd { mean, std }
    };
    let roc_auc = if reports.iter().all(|r| r.roc_auc.is_some()) {
        let values: Vec<f64> = reports.iter().map(|r| r.roc_auc.unwrap()).collect();
        let (mean, std) = crate::ddf::mean_and_std(&values);
        Some(MeanStd { mean, std })
    } else {
        None
    };
    Ok(FoldStats {
        n_folds: reports.len(),
        hit_rate: stat(&|r| r.hit_rate),
        false_alarm_rate: stat(&|r| r.false_alarm_rate),
        false_negative_rate: stat(&|r| r.false_negative_rate),
        f1: stat(&|r| r.f1),
        mcc: stat(&|r| r.mcc),
        brier: stat(&|r| r.brier),
        roc_auc,
    })
}
