//! Data-driven filtering: interpretable per-predictor threshold rules
//! learned from positive-class quantiles and selected sequentially by a
//! weighted FAR+FNR score.
//!
//! A row survives a filter when it lies strictly inside every rule's
//! `(tau_min, tau_max)` interval; the filter is the product of these
//! indicator terms. Thresholds come from the tails of the positive-class
//! distribution, so the fraction of positives a rule rejects (FNR) is
//! bounded a priori by its quantile budget, while the fraction of
//! negatives it fails to reject (FAR) is measured on the data. Each
//! selection pass scores every remaining (predictor, budget) candidate
//! with `lambda * FNR + FAR`, keeps the minimizer, filters the surviving
//! rows with it, and repeats until no candidate scores below the stop
//! threshold.

use std::cmp::Ordering;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tabular::{Dataset, FoldPlan};

/// Empirical quantile with linear interpolation between order statistics
/// (the inclusive convention, position `h = (n-1) * p`). This is the one
/// quantile definition used throughout the crate.
///
/// `sorted` must be ascending and nonempty; `p` in [0, 1].
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Open interval `(tau_min, tau_max)` on one predictor. A row passes the
/// rule when its value lies strictly inside; infinite bounds leave that
/// side unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRule {
    pub predictor_index: usize,
    pub predictor_name: String,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Positive-class mass the rule is allowed to reject.
    pub quantile_budget: f64,
}

impl ThresholdRule {
    pub fn new(
        predictor_index: usize,
        predictor_name: impl Into<String>,
        tau_min: f64,
        tau_max: f64,
        quantile_budget: f64,
    ) -> Result<Self> {
        if tau_min.partial_cmp(&tau_max) != Some(Ordering::Less) {
            return Err(Error::DegenerateRule(format!(
                "tau_min {tau_min} must be below tau_max {tau_max}"
            )));
        }
        if !(0.0..1.0).contains(&quantile_budget) {
            return Err(Error::Config(format!(
                "quantile budget {quantile_budget} outside [0, 1)"
            )));
        }
        Ok(Self {
            predictor_index,
            predictor_name: predictor_name.into(),
            tau_min,
            tau_max,
            quantile_budget,
        })
    }

    fn accepts(&self, value: f64) -> bool {
        value > self.tau_min && value < self.tau_max
    }
}

/// FNR/FAR of one rule plus their weighted combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleScore {
    pub fnr: f64,
    pub far: f64,
    /// `lambda * fnr + far` for the lambda used at scoring time.
    pub weighted: f64,
}

/// Hyperparameters of the sequential threshold search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdfConfig {
    /// Weight of FNR relative to FAR in the selection score.
    pub lambda: f64,
    /// Candidate quantile budgets tried for every predictor each pass.
    pub quantile_grid: Vec<f64>,
    /// Fraction of a budget assigned to the lower tail.
    pub tail_split: f64,
    /// Selection stops when the best candidate scores at or above this;
    /// 0 disables the score-based stop.
    pub stop_score: f64,
    /// Cap on the number of selected rules; `None` means one per predictor.
    pub max_passes: Option<usize>,
}

impl Default for DdfConfig {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            quantile_grid: vec![0.001, 0.0025, 0.005, 0.01, 0.025, 0.05],
            tail_split: 0.5,
            stop_score: 0.98,
            max_passes: None,
        }
    }
}

impl DdfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda {} must be positive and finite",
                self.lambda
            )));
        }
        if self.quantile_grid.is_empty() {
            return Err(Error::Config("quantile grid is empty".into()));
        }
        for &q in &self.quantile_grid {
            if !(0.0..1.0).contains(&q) {
                return Err(Error::Config(format!("grid budget {q} outside [0, 1)")));
            }
        }
        if !(0.0..=1.0).contains(&self.tail_split) {
            return Err(Error::Config(format!(
                "tail_split {} outside [0, 1]",
                self.tail_split
            )));
        }
        if !(0.0..=1.0).contains(&self.stop_score) {
            return Err(Error::Config(format!(
                "stop_score {} outside [0, 1]",
                self.stop_score
            )));
        }
        Ok(())
    }
}

/// How sequential selection terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStatus {
    /// The best remaining candidate scored at or above the stop score.
    Completed,
    /// The pass cap was reached.
    MaxPasses,
    /// Filtering left fewer than two positives or no negatives.
    ClassDepleted,
    /// Every predictor was either selected or skipped.
    PredictorsExhausted,
}

/// Ordered threshold rules with the score each one won its pass with.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterModel {
    pub rules: Vec<ThresholdRule>,
    pub pass_scores: Vec<RuleScore>,
    pub config: DdfConfig,
    pub status: SelectionStatus,
}

impl FilterModel {
    /// A filter with no rules; its mask selects every row.
    pub fn empty(config: DdfConfig) -> Self {
        Self {
            rules: Vec::new(),
            pass_scores: Vec::new(),
            config,
            status: SelectionStatus::Completed,
        }
    }

    /// Portable form with rules keyed by predictor name.
    pub fn to_file(&self) -> FilterModelFile {
        FilterModelFile {
            config: self.config.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleFile {
                    predictor_name: r.predictor_name.clone(),
                    tau_min: TauValue(r.tau_min),
                    tau_max: TauValue(r.tau_max),
                    quantile_budget: r.quantile_budget,
                })
                .collect(),
            pass_scores: self.pass_scores.clone(),
            status: self.status,
            provenance: None,
        }
    }
}

/// Serialized filter with name-keyed rules; bind it to a predictor list
/// to recover an applicable [`FilterModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterModelFile {
    pub config: DdfConfig,
    pub rules: Vec<RuleFile>,
    pub pass_scores: Vec<RuleScore>,
    pub status: SelectionStatus,
    /// Opaque run metadata echoed by writers; ignored by the filter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleFile {
    pub predictor_name: String,
    pub tau_min: TauValue,
    pub tau_max: TauValue,
    pub quantile_budget: f64,
}

impl FilterModelFile {
    /// Resolves each rule's predictor name against a column list,
    /// restoring index-based rules.
    pub fn bind(&self, predictor_names: &[String]) -> Result<FilterModel> {
        let mut rules = Vec::with_capacity(self.rules.len());
        for r in &self.rules {
            let idx = predictor_names
                .iter()
                .position(|n| *n == r.predictor_name)
                .ok_or_else(|| {
                    Error::Schema(format!(
                        "filter rule predictor '{}' not found in data columns",
                        r.predictor_name
                    ))
                })?;
            rules.push(ThresholdRule::new(
                idx,
                r.predictor_name.clone(),
                r.tau_min.0,
                r.tau_max.0,
                r.quantile_budget,
            )?);
        }
        Ok(FilterModel {
            rules,
            pass_scores: self.pass_scores.clone(),
            config: self.config.clone(),
            status: self.status,
        })
    }
}

/// Threshold bound serialized as a number, or as "-inf"/"+inf" for the
/// unbounded sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauValue(pub f64);

impl Serialize for TauValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            serializer.serialize_str("+inf")
        } else if self.0 == f64::NEG_INFINITY {
            serializer.serialize_str("-inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

struct TauVisitor;

impl Visitor<'_> for TauVisitor {
    type Value = TauValue;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("a number or \"-inf\"/\"+inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<TauValue, E> {
        Ok(TauValue(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<TauValue, E> {
        Ok(TauValue(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<TauValue, E> {
        Ok(TauValue(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<TauValue, E> {
        match v {
            "+inf" | "inf" => Ok(TauValue(f64::INFINITY)),
            "-inf" => Ok(TauValue(f64::NEG_INFINITY)),
            _ => Err(E::custom(format!("unrecognized threshold string '{v}'"))),
        }
    }
}

impl<'de> Deserialize<'de> for TauValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_any(TauVisitor)
    }
}

/// Learns the threshold interval for one predictor from the quantiles of
/// its positive-class values.
///
/// The budget is split across the tails by `tail_split`, then each
/// tail's share is snapped down to a whole number of rejectable
/// positives, `k = floor(n_pos * share)`, and the threshold placed at
/// the `k/n_pos` quantile. This keeps the realized FNR at or below the
/// budget. A tail whose share rounds to zero gets its threshold nudged
/// just past the positive extremum, so that side rejects nothing.
pub fn thresholds_for(
    ds: &Dataset,
    predictor: usize,
    q: f64,
    tail_split: f64,
) -> Result<ThresholdRule> {
    if predictor >= ds.n_predictors() {
        return Err(Error::Shape(format!(
            "predictor index {predictor} out of range for {} predictors",
            ds.n_predictors()
        )));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Config(format!("quantile budget {q} outside [0, 1)")));
    }
    if !(0.0..=1.0).contains(&tail_split) {
        return Err(Error::Config(format!("tail_split {tail_split} outside [0, 1]")));
    }
    let mut pos = ds.positive_column(predictor);
    if pos.len() < 2 {
        return Err(Error::InsufficientPositives(format!(
            "{} positive rows, need at least 2",
            pos.len()
        )));
    }
    pos.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = pos.len();
    let (min, max) = (pos[0], pos[n - 1]);
    let name = ds.predictor_names()[predictor].clone();
    if q > 0.0 && min == max {
        return Err(Error::DegenerateRule(format!(
            "predictor '{name}' is constant over the positive class"
        )));
    }
    let k_lo = (n as f64 * q * tail_split).floor() as usize;
    let k_hi = (n as f64 * q * (1.0 - tail_split)).floor() as usize;
    let tau_min = if k_lo == 0 {
        min.next_down()
    } else {
        empirical_quantile(&pos, k_lo as f64 / n as f64)
    };
    let tau_max = if k_hi == 0 {
        max.next_up()
    } else {
        empirical_quantile(&pos, 1.0 - k_hi as f64 / n as f64)
    };
    if tau_min.partial_cmp(&tau_max) != Some(Ordering::Less) {
        return Err(Error::DegenerateRule(format!(
            "predictor '{name}': thresholds collapse to [{tau_min}, {tau_max}] under ties"
        )));
    }
    ThresholdRule::new(predictor, name, tau_min, tau_max, q)
}

fn rule_mask(rule: &ThresholdRule, ds: &Dataset) -> Result<Vec<u8>> {
    if rule.predictor_index >= ds.n_predictors() {
        return Err(Error::Shape(format!(
            "rule predictor index {} out of range for {} predictors",
            rule.predictor_index,
            ds.n_predictors()
        )));
    }
    Ok((0..ds.n_samples())
        .map(|i| u8::from(rule.accepts(ds.value(i, rule.predictor_index))))
        .collect())
}

/// Selection mask of the filter product: `mask[i] = 1` iff row `i`
/// satisfies every rule strictly. An empty rule list selects everything.
pub fn apply_filter(fm: &FilterModel, ds: &Dataset) -> Result<Vec<u8>> {
    let mut mask = vec![1u8; ds.n_samples()];
    for rule in &fm.rules {
        if rule.predictor_index >= ds.n_predictors() {
            return Err(Error::Shape(format!(
                "rule predictor index {} out of range for {} predictors",
                rule.predictor_index,
                ds.n_predictors()
            )));
        }
        for (i, m) in mask.iter_mut().enumerate() {
            if *m == 1 && !rule.accepts(ds.value(i, rule.predictor_index)) {
                *m = 0;
            }
        }
    }
    Ok(mask)
}

/// Scores one rule on a dataset: treating selected rows as positives of
/// the filter, FNR is the fraction of class-1 rows rejected and FAR the
/// fraction of class-0 rows selected.
pub fn score_rule(ds: &Dataset, rule: &ThresholdRule, lambda: f64) -> Result<RuleScore> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "lambda {lambda} must be positive and finite"
        )));
    }
    let mask = rule_mask(rule, ds)?;
    let mut tp = 0u64;
    let mut fn_ = 0u64;
    let mut fp = 0u64;
    let mut tn = 0u64;
    for (i, &m) in mask.iter().enumerate() {
        match (ds.labels()[i], m) {
            (1, 1) => tp += 1,
            (1, 0) => fn_ += 1,
            (0, 1) => fp += 1,
            _ => tn += 1,
        }
    }
    if tp + fn_ == 0 || fp + tn == 0 {
        return Err(Error::UndefinedRate(
            "dataset must contain both classes to score a rule".into(),
        ));
    }
    let fnr = fn_ as f64 / (tp + fn_) as f64;
    let far = fp as f64 / (fp + tn) as f64;
    Ok(RuleScore {
        fnr,
        far,
        weighted: lambda * fnr + far,
    })
}

/// Candidate considered during one selection pass.
#[derive(Debug, Clone)]
struct Candidate {
    rule: ThresholdRule,
    score: RuleScore,
    budget: f64,
}

/// Total order for picking the pass winner: lowest weighted score, ties
/// broken by lower predictor index, then smaller budget. Independent of
/// evaluation order.
fn better(a: &Candidate, b: &Candidate) -> bool {
    (a.score.weighted, a.rule.predictor_index, a.budget)
        < (b.score.weighted, b.rule.predictor_index, b.budget)
}

/// Greedy sequential threshold selection.
///
/// Each pass evaluates every unused predictor at every grid budget on
/// the rows surviving the rules selected so far, keeps the candidate
/// with the lowest weighted score, and stops once that minimum reaches
/// the stop score (or a structural limit is hit). Predictors constant
/// over the surviving positives are skipped with a warning.
pub fn select_sequential(ds: &Dataset, cfg: &DdfConfig) -> Result<FilterModel> {
    cfg.validate()?;
    if ds.n_positives() == 0 || ds.n_negatives() == 0 {
        return Err(Error::UndefinedRate(
            "selection needs both classes present".into(),
        ));
    }
    if ds.n_positives() < 2 {
        return Err(Error::InsufficientPositives(
            "selection needs at least 2 positive rows".into(),
        ));
    }
    let p = ds.n_predictors();
    let max_passes = cfg.max_passes.unwrap_or(p);
    let mut current = ds.clone();
    let mut used = vec![false; p];
    let mut warned_skip = vec![false; p];
    let mut rules = Vec::new();
    let mut pass_scores = Vec::new();

    let status = loop {
        if rules.len() >= max_passes {
            break SelectionStatus::MaxPasses;
        }
        if current.n_positives() < 2 || current.n_negatives() == 0 {
            break SelectionStatus::ClassDepleted;
        }
        let mut best: Option<Candidate> = None;
        for j in (0..p).filter(|&j| !used[j]) {
            for &q in &cfg.quantile_grid {
                let rule = match thresholds_for(&current, j, q, cfg.tail_split) {
                    Ok(rule) => rule,
                    Err(Error::DegenerateRule(msg)) => {
                        if !warned_skip[j] {
                            log::warn!("skipping predictor during selection: {msg}");
                            warned_skip[j] = true;
                        }
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let score = score_rule(&current, &rule, cfg.lambda)?;
                let cand = Candidate {
                    rule,
                    score,
                    budget: q,
                };
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    best = Some(cand);
                }
            }
        }
        let Some(winner) = best else {
            break SelectionStatus::PredictorsExhausted;
        };
        if cfg.stop_score > 0.0 && winner.score.weighted >= cfg.stop_score {
            break SelectionStatus::Completed;
        }
        used[winner.rule.predictor_index] = true;
        let mask = rule_mask(&winner.rule, &current)?;
        current = current.select(&mask)?;
        rules.push(winner.rule);
        pass_scores.push(winner.score);
    };

    Ok(FilterModel {
        rules,
        pass_scores,
        config: cfg.clone(),
        status,
    })
}

/// Per-pass statistics of a filter learned independently on each fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassStat {
    /// Winning predictor name if all folds agreed on it.
    pub predictor: Option<String>,
    pub mean_weighted: f64,
    pub std_weighted: f64,
}

/// Cross-fold summary of sequential selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossFoldScores {
    /// One entry per pass index present in every included fold.
    pub passes: Vec<PassStat>,
    /// Folds skipped because their fit rows lacked a usable class mix.
    pub excluded_folds: Vec<usize>,
    /// True when folds picked different predictors at some reported pass.
    pub predictor_disagreement: bool,
}

pub(crate) fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        var.sqrt()
    };
    (mean, std)
}

/// Runs [`select_sequential`] on each fold's fit rows and aggregates the
/// winning weighted score per pass as mean and sample standard
/// deviation. Passes are reported only up to the shortest fold's rule
/// list; folds whose fit rows lack both classes (or a second positive)
/// are excluded with a warning.
pub fn cross_fold_scores(ds: &Dataset, plan: &FoldPlan, cfg: &DdfConfig) -> Result<CrossFoldScores> {
    cfg.validate()?;
    plan.validate(ds)?;
    let mut models = Vec::new();
    let mut excluded_folds = Vec::new();
    for (k, fold) in plan.folds.iter().enumerate() {
        let fit = ds.subset(&fold.fit);
        if fit.n_positives() < 2 || fit.n_negatives() == 0 {
            log::warn!(
                "fold {k} excluded: {} positives, {} negatives in fit rows",
                fit.n_positives(),
                fit.n_negatives()
            );
            excluded_folds.push(k);
            continue;
        }
        models.push(select_sequential(&fit, cfg)?);
    }
    let n_passes = models.iter().map(|m| m.rules.len()).min().unwrap_or(0);
    let mut passes = Vec::with_capacity(n_passes);
    let mut predictor_disagreement = false;
    for i in 0..n_passes {
        let scores: Vec<f64> = models.iter().map(|m| m.pass_scores[i].weighted).collect();
        let (mean_weighted, std_weighted) = mean_and_std(&scores);
        let first = &models[0].rules[i].predictor_name;
        let agreed = models.iter().all(|m| m.rules[i].predictor_name == *first);
        if !agreed {
            predictor_disagreement = true;
        }
        passes.push(PassStat {
            predictor: agreed.then(|| first.clone()),
            mean_weighted,
            std_weighted,
        });
    }
    Ok(CrossFoldScores {
        passes,
        excluded_folds,
        predictor_disagreement,
    })
}

/// One row of the per-pass report table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRow {
    pub pass: usize,
    pub predictor_name: String,
    pub tau_min: f64,
    pub tau_max: f64,
    pub score: RuleScore,
    /// Fraction of the dataset's original positives rejected by rules
    /// 1..=pass together.
    pub cumulative_fnr: f64,
}

/// Recomputes the cumulative positive loss of each rule prefix on `ds`
/// and pairs it with the stored per-pass scores.
pub fn pass_table(ds: &Dataset, fm: &FilterModel) -> Result<Vec<PassRow>> {
    if fm.rules.len() != fm.pass_scores.len() {
        return Err(Error::Shape(format!(
            "{} rules but {} pass scores",
            fm.rules.len(),
            fm.pass_scores.len()
        )));
    }
    let total_pos = ds.n_positives();
    if total_pos == 0 {
        return Err(Error::UndefinedRate(
            "cumulative FNR needs at least one positive row".into(),
        ));
    }
    let mut alive = vec![1u8; ds.n_samples()];
    let mut rows = Vec::with_capacity(fm.rules.len());
    for (i, (rule, score)) in fm.rules.iter().zip(&fm.pass_scores).enumerate() {
        if rule.predictor_index >= ds.n_predictors() {
            return Err(Error::Shape(format!(
                "rule predictor index {} out of range",
                rule.predictor_index
            )));
        }
        for (r, m) in alive.iter_mut().enumerate() {
            if *m == 1 && !rule.accepts(ds.value(r, rule.predictor_index)) {
                *m = 0;
            }
        }
        let alive_pos = alive
            .iter()
            .enumerate()
            .filter(|(r, &m)| m == 1 && ds.labels()[*r] == 1)
            .count();
        rows.push(PassRow {
            pass: i + 1,
            predictor_name: rule.predictor_name.clone(),
            tau_min: rule.tau_min,
            tau_max: rule.tau_max,
            score: *score,
            cumulative_fnr: 1.0 - alive_pos as f64 / total_pos as f64,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::SynthConfig;

    fn dataset_from_columns(cols: Vec<(&str, Vec<f64>)>, labels: Vec<u8>) -> Dataset {
        let n = labels.len();
        let p = cols.len();
        let mut values = vec![0.0; n * p];
        for (j, (_, col)) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                values[i * p + j] = v;
            }
        }
        let names = cols.iter().map(|(n, _)| n.to_string()).collect();
        Dataset::new(names, values, labels, None, None).unwrap()
    }

    #[test]
    fn quantile_convention_examples() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        // position h = 99 * 0.02 = 1.98 -> between 2 and 3
        assert!((empirical_quantile(&xs, 0.02) - 2.98).abs() < 1e-12);
        assert!((empirical_quantile(&xs, 0.98) - 98.02).abs() < 1e-12);
        assert_eq!(empirical_quantile(&xs, 0.0), 1.0);
        assert_eq!(empirical_quantile(&xs, 1.0), 100.0);
    }

    #[test]
    fn thresholds_match_hand_quantiles() {
        // positives at 1..=100, budget 0.04 split evenly: 2% and 98%
        // quantiles of {1..100} are 2.98 and 98.02
        let mut cols = vec![0.0f64; 0];
        let mut labels = Vec::new();
        for v in 1..=100 {
            cols.push(f64::from(v));
            labels.push(1);
        }
        // pad with a few negatives so the dataset is two-class
        cols.extend([0.0, 0.0]);
        labels.extend([0, 0]);
        let ds = dataset_from_columns(vec![("x", cols)], labels);
        let rule = thresholds_for(&ds, 0, 0.04, 0.5).unwrap();
        assert!((rule.tau_min - 2.98).abs() < 1e-12, "tau_min {}", rule.tau_min);
        assert!((rule.tau_max - 98.02).abs() < 1e-12, "tau_max {}", rule.tau_max);
        // exactly 4 positives fall outside the open interval
        let score = score_rule(&ds, &rule, 10.0).unwrap();
        assert!((score.fnr - 0.04).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_keeps_every_positive() {
        let ds = dataset_from_columns(
            vec![("x", vec![3.0, 5.0, 9.0, 0.0, 20.0])],
            vec![1, 1, 1, 0, 0],
        );
        let rule = thresholds_for(&ds, 0, 0.0, 0.5).unwrap();
        assert!(rule.tau_min < 3.0 && rule.tau_max > 9.0);
        let score = score_rule(&ds, &rule, 10.0).unwrap();
        assert_eq!(score.fnr, 0.0);
    }

    #[test]
    fn one_sided_budget_leaves_upper_tail_open() {
        let pos: Vec<f64> = (1..=50).map(f64::from).collect();
        let mut col = pos.clone();
        col.push(-100.0);
        let mut labels = vec![1u8; 50];
        labels.push(0);
        let ds = dataset_from_columns(vec![("x", col)], labels);
        let rule = thresholds_for(&ds, 0, 0.1, 1.0).unwrap();
        assert!(rule.tau_max > 50.0, "upper tail must stay open");
        assert!(rule.tau_min > 1.0, "lower tail must be trimmed");
    }

    #[test]
    fn constant_positive_predictor_is_degenerate_for_positive_budget() {
        let ds = dataset_from_columns(vec![("x", vec![2.0, 2.0, 2.0, 0.0])], vec![1, 1, 1, 0]);
        assert!(matches!(
            thresholds_for(&ds, 0, 0.1, 0.5),
            Err(Error::DegenerateRule(_))
        ));
        // zero budget still works: the nudged interval keeps all positives
        let rule = thresholds_for(&ds, 0, 0.0, 0.5).unwrap();
        let score = score_rule(&ds, &rule, 1.0).unwrap();
        assert_eq!(score.fnr, 0.0);
    }

    #[test]
    fn too_few_positives() {
        let ds = dataset_from_columns(vec![("x", vec![1.0, 2.0])], vec![1, 0]);
        assert!(matches!(
            thresholds_for(&ds, 0, 0.1, 0.5),
            Err(Error::InsufficientPositives(_))
        ));
    }

    #[test]
    fn boundary_values_are_excluded_by_strict_inequality() {
        let ds = dataset_from_columns(
            vec![("x", vec![-1.0, 0.0, 1.0, 2.0, 3.0])],
            vec![0, 0, 1, 0, 0],
        );
        let rule = ThresholdRule::new(0, "x", 0.0, 2.0, 0.0).unwrap();
        let fm = FilterModel {
            rules: vec![rule],
            pass_scores: vec![RuleScore {
                fnr: 0.0,
                far: 0.0,
                weighted: 0.0,
            }],
            config: DdfConfig::default(),
            status: SelectionStatus::Completed,
        };
        assert_eq!(apply_filter(&fm, &ds).unwrap(), vec![0, 0, 1, 0, 0]);
    }

    #[test]
    fn empty_filter_selects_everything() {
        let ds = dataset_from_columns(vec![("x", vec![1.0, 2.0, 3.0])], vec![0, 1, 0]);
        let fm = FilterModel::empty(DdfConfig::default());
        assert_eq!(apply_filter(&fm, &ds).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn weighted_score_substitution() {
        // fnr 0.01, far 0.5, lambda 10 -> 0.6
        let ds = dataset_from_columns(
            vec![("x", vec![0.0, 1.0, 2.0, 3.0])],
            vec![1, 1, 0, 0],
        );
        let rule = ThresholdRule::new(0, "x", -1.0, 10.0, 0.0).unwrap();
        let s = score_rule(&ds, &rule, 10.0).unwrap();
        // rule selects everything: fnr 0, far 1, weighted 1 for any lambda
        assert_eq!(s.fnr, 0.0);
        assert_eq!(s.far, 1.0);
        assert_eq!(s.weighted, 1.0);
        let s2 = score_rule(&ds, &rule, 3.5).unwrap();
        assert_eq!(s2.weighted, 1.0);
    }

    #[test]
    fn weighted_score_hand_value() {
        // 100 positives with exactly one rejected, 2 negatives with one
        // selected: fnr 0.01, far 0.5 -> weighted 0.60 at lambda 10
        let mut col: Vec<f64> = (1..=100).map(f64::from).collect();
        let mut labels = vec![1u8; 100];
        col.extend([50.0, 1000.0]);
        labels.extend([0, 0]);
        let ds = dataset_from_columns(vec![("x", col)], labels);
        let rule = ThresholdRule::new(0, "x", 1.5, 500.0, 0.01).unwrap();
        let s = score_rule(&ds, &rule, 10.0).unwrap();
        assert_eq!(s.fnr, 0.01);
        assert_eq!(s.far, 0.5);
        assert!((s.weighted - 0.60).abs() < 1e-15);
    }

    #[test]
    fn selection_stops_when_a_class_is_depleted() {
        // all negatives sit far outside the positive range, so the first
        // rule removes every negative and selection cannot continue
        let mut col: Vec<f64> = (0..100).map(|i| 0.3 + 0.004 * i as f64).collect();
        let mut labels = vec![1u8; 100];
        for _ in 0..100 {
            col.push(5.0);
            labels.push(0);
        }
        let ds = dataset_from_columns(vec![("x", col.clone()), ("y", col)], labels);
        let fm = select_sequential(&ds, &DdfConfig::default()).unwrap();
        assert_eq!(fm.rules.len(), 1);
        assert_eq!(fm.status, SelectionStatus::ClassDepleted);
    }

    #[test]
    fn cross_fold_excludes_single_class_folds() {
        let cfg = SynthConfig {
            n_samples: 4_000,
            imbalance: 0.05,
            n_informative: 1,
            n_noise: 1,
            separation: 2.0,
            seed: 13,
        };
        let base = crate::tabular::synthesize(&cfg).unwrap();
        let n = base.n_samples();
        let mut values: Vec<f64> = (0..n).flat_map(|i| base.row(i).to_vec()).collect();
        let mut labels = base.labels().to_vec();
        let mut times = vec![2i64; n];
        // two all-negative rows at earlier times plus two eval rows later
        for t in [0i64, 1, 3, 4] {
            values.extend([0.0, 0.0]);
            labels.push(0);
            times.push(t);
        }
        let ds = Dataset::new(
            base.predictor_names().to_vec(),
            values,
            labels,
            None,
            Some(times),
        )
        .unwrap();
        // fold 0 fits only the all-negative early rows; fold 1 fits everything
        let plan = crate::tabular::FoldPlan {
            folds: vec![
                crate::tabular::Fold {
                    fit: vec![n, n + 1],
                    eval: vec![n + 2],
                },
                crate::tabular::Fold {
                    fit: (0..n).collect(),
                    eval: vec![n + 3],
                },
            ],
        };
        let cfs = cross_fold_scores(&ds, &plan, &DdfConfig::default()).unwrap();
        assert_eq!(cfs.excluded_folds, vec![0]);
        assert!(!cfs.passes.is_empty());
    }

    #[test]
    fn score_rule_single_class_is_undefined() {
        let ds = dataset_from_columns(vec![("x", vec![1.0, 2.0])], vec![1, 1]);
        let rule = ThresholdRule::new(0, "x", 0.0, 3.0, 0.0).unwrap();
        assert!(matches!(
            score_rule(&ds, &rule, 10.0),
            Err(Error::UndefinedRate(_))
        ));
    }

    #[test]
    fn planted_predictor_selected_first() {
        let cfg = SynthConfig {
            n_samples: 50_000,
            imbalance: 1e-3,
            n_informative: 1,
            n_noise: 9,
            separation: 3.0,
            seed: 11,
        };
        let ds = crate::tabular::synthesize(&cfg).unwrap();
        let fm = select_sequential(&ds, &DdfConfig::default()).unwrap();
        assert!(!fm.rules.is_empty(), "expected at least one rule");
        assert_eq!(fm.rules[0].predictor_name, "inf1");
    }

    #[test]
    fn pure_noise_selects_nothing() {
        // enough positives that the keep-all candidates' FAR (negative
        // mass inside the positive range, about 1 - 2/n_pos) stays above
        // the stop score with wide margin
        let cfg = SynthConfig {
            n_samples: 200_000,
            imbalance: 1e-2,
            n_informative: 0,
            n_noise: 10,
            separation: 0.0,
            seed: 5,
        };
        let ds = crate::tabular::synthesize(&cfg).unwrap();
        let fm = select_sequential(&ds, &DdfConfig::default()).unwrap();
        assert!(
            fm.rules.is_empty(),
            "noise-only data should select nothing, got {:?}",
            fm.rules
        );
        assert_eq!(fm.status, SelectionStatus::Completed);
    }

    #[test]
    fn stop_score_zero_with_pass_cap_emits_one_rule() {
        let cfg = SynthConfig {
            n_samples: 5_000,
            imbalance: 0.05,
            n_informative: 1,
            n_noise: 2,
            separation: 2.0,
            seed: 3,
        };
        let ds = crate::tabular::synthesize(&cfg).unwrap();
        let ddf = DdfConfig {
            stop_score: 0.0,
            max_passes: Some(1),
            ..DdfConfig::default()
        };
        let fm = select_sequential(&ds, &ddf).unwrap();
        assert_eq!(fm.rules.len(), 1);
        assert_eq!(fm.status, SelectionStatus::MaxPasses);
    }

    #[test]
    fn cross_fold_identical_folds_zero_std() {
        let cfg = SynthConfig {
            n_samples: 8_000,
            imbalance: 0.02,
            n_informative: 1,
            n_noise: 2,
            separation: 2.5,
            seed: 9,
        };
        let base = crate::tabular::synthesize(&cfg).unwrap();
        let n = base.n_samples();
        // append two eval rows at later times; both folds fit on the
        // same leading rows, which is enough to make the plan valid
        let mut values: Vec<f64> = (0..n).flat_map(|i| base.row(i).to_vec()).collect();
        let mut labels = base.labels().to_vec();
        let mut times = vec![0i64; n];
        for extra in 1..=2 {
            values.extend(vec![0.0; base.n_predictors()]);
            labels.push(0);
            times.push(extra);
        }
        let ds = Dataset::new(
            base.predictor_names().to_vec(),
            values,
            labels,
            None,
            Some(times),
        )
        .unwrap();
        let fit: Vec<usize> = (0..n).collect();
        let plan = crate::tabular::FoldPlan {
            folds: vec![
                crate::tabular::Fold {
                    fit: fit.clone(),
                    eval: vec![n],
                },
                crate::tabular::Fold {
                    fit,
                    eval: vec![n + 1],
                },
            ],
        };
        let cfs = cross_fold_scores(&ds, &plan, &DdfConfig::default()).unwrap();
        assert!(!cfs.passes.is_empty());
        for p in &cfs.passes {
            assert_eq!(p.std_weighted, 0.0, "identical folds must have zero std");
            assert!(p.predictor.is_some());
        }
        assert!(!cfs.predictor_disagreement);
    }

    #[test]
    fn filter_json_round_trip() {
        let cfg = SynthConfig {
            n_samples: 20_000,
            imbalance: 5e-3,
            n_informative: 2,
            n_noise: 3,
            separation: 2.5,
            seed: 21,
        };
        let ds = crate::tabular::synthesize(&cfg).unwrap();
        let fm = select_sequential(&ds, &DdfConfig::default()).unwrap();
        let json = serde_json::to_string_pretty(&fm.to_file()).unwrap();
        let parsed: FilterModelFile = serde_json::from_str(&json).unwrap();
        let rebound = parsed.bind(ds.predictor_names()).unwrap();
        assert_eq!(fm, rebound);
        assert_eq!(
            apply_filter(&fm, &ds).unwrap(),
            apply_filter(&rebound, &ds).unwrap()
        );
    }

    #[test]
    fn infinite_thresholds_round_trip_as_strings() {
        let fm = FilterModel {
            rules: vec![ThresholdRule::new(0, "x", f64::NEG_INFINITY, 1.5, 0.01).unwrap()],
            pass_scores: vec![RuleScore {
                fnr: 0.0,
                far: 0.5,
                weighted: 0.5,
            }],
            config: DdfConfig::default(),
            status: SelectionStatus::MaxPasses,
        };
        let json = serde_json::to_string(&fm.to_file()).unwrap();
        assert!(json.contains("\"-inf\""));
        let parsed: FilterModelFile = serde_json::from_str(&json).unwrap();
        let rebound = parsed.bind(&["x".to_string()]).unwrap();
        assert_eq!(rebound.rules[0].tau_min, f64::NEG_INFINITY);
        assert_eq!(rebound.rules[0].tau_max, 1.5);
    }

    #[test]
    fn pass_table_reports_cumulative_fnr() {
        let ds = dataset_from_columns(
            vec![
                ("a", vec![1.0, 2.0, 3.0, 4.0, 10.0, 11.0]),
                ("b", vec![5.0, 6.0, 7.0, 8.0, 9.0, -3.0]),
            ],
            vec![1, 1, 1, 1, 0, 0],
        );
        let fm = FilterModel {
            rules: vec![
                ThresholdRule::new(0, "a", 1.5, 100.0, 0.25).unwrap(),
                ThresholdRule::new(1, "b", 0.0, 7.5, 0.25).unwrap(),
            ],
            pass_scores: vec![
                RuleScore {
                    fnr: 0.25,
                    far: 1.0,
                    weighted: 3.5,
                },
                RuleScore {
                    fnr: 1.0 / 3.0,
                    far: 0.0,
                    weighted: 10.0 / 3.0,
                },
            ],
            config: DdfConfig::default(),
            status: SelectionStatus::Completed,
        };
        let table = pass_table(&ds, &fm).unwrap();
        // rule 1 rejects the positive at a=1.0: cumulative 1/4
        assert!((table[0].cumulative_fnr - 0.25).abs() < 1e-12);
        // rule 2 additionally rejects the positive at b=8.0: cumulative 2/4
        assert!((table[1].cumulative_fnr - 0.5).abs() < 1e-12);
    }
}
