//! Tabular data model: CSV ingestion, temporal fold planning, and a
//! synthetic generator for heavily imbalanced binary-labeled data.
//!
//! A [`Dataset`] is an immutable table of real-valued predictors with a
//! binary label per row, plus optional group and time columns. All
//! invariants (finite predictors, labels in {0,1}, equal column lengths)
//! are enforced at construction, so downstream code never revalidates.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Immutable table of predictors, binary labels, and optional
/// group/time columns. Rows are stored flat in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    predictor_names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<u8>,
    group: Option<Vec<String>>,
    time_index: Option<Vec<i64>>,
}

impl Dataset {
    /// Builds a dataset, validating every invariant: equal column
    /// lengths, labels in {0,1}, and finite predictor values.
    pub fn new(
        predictor_names: Vec<String>,
        values: Vec<f64>,
        labels: Vec<u8>,
        group: Option<Vec<String>>,
        time_index: Option<Vec<i64>>,
    ) -> Result<Self> {
        if predictor_names.is_empty() {
            return Err(Error::Schema("dataset has no predictor columns".into()));
        }
        let n_predictors = predictor_names.len();
        let n_samples = labels.len();
        if values.len() != n_samples * n_predictors {
            return Err(Error::Shape(format!(
                "expected {} predictor values for {} rows x {} predictors, got {}",
                n_samples * n_predictors,
                n_samples,
                n_predictors,
                values.len()
            )));
        }
        if let Some(g) = &group {
            if g.len() != n_samples {
                return Err(Error::Shape(format!(
                    "group column has {} entries, expected {}",
                    g.len(),
                    n_samples
                )));
            }
        }
        if let Some(t) = &time_index {
            if t.len() != n_samples {
                return Err(Error::Shape(format!(
                    "time column has {} entries, expected {}",
                    t.len(),
                    n_samples
                )));
            }
        }
        for (i, &l) in labels.iter().enumerate() {
            if l > 1 {
                return Err(Error::Load {
                    row: i + 1,
                    column: "label".into(),
                    reason: format!("label {l} outside {{0,1}}"),
                });
            }
        }
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Load {
                    row: k / n_predictors + 1,
                    column: predictor_names[k % n_predictors].clone(),
                    reason: format!("non-finite predictor value {v}"),
                });
            }
        }
        Ok(Self {
            predictor_names,
            values,
            labels,
            group,
            time_index,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.predictor_names.len()
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.predictor_names
    }

    /// Index of the named predictor column.
    pub fn predictor_index(&self, name: &str) -> Option<usize> {
        self.predictor_names.iter().position(|n| n == name)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_predictors();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn value(&self, row: usize, predictor: usize) -> f64 {
        self.values[row * self.n_predictors() + predictor]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn group(&self) -> Option<&[String]> {
        self.group.as_deref()
    }

    pub fn time_index(&self) -> Option<&[i64]> {
        self.time_index.as_deref()
    }

    pub fn n_positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn n_negatives(&self) -> usize {
        self.n_samples() - self.n_positives()
    }

    /// Values of one predictor restricted to rows with label 1.
    pub fn positive_column(&self, predictor: usize) -> Vec<f64> {
        (0..self.n_samples())
            .filter(|&i| self.labels[i] == 1)
            .map(|i| self.value(i, predictor))
            .collect()
    }

    /// New dataset containing the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let p = self.n_predictors();
        let mut values = Vec::with_capacity(indices.len() * p);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            predictor_names: self.predictor_names.clone(),
            values,
            labels,
            group: self
                .group
                .as_ref()
                .map(|g| indices.iter().map(|&i| g[i].clone()).collect()),
            time_index: self
                .time_index
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i]).collect()),
        }
    }

    /// Rows where `mask[i] == 1`.
    pub fn select(&self, mask: &[u8]) -> Result<Dataset> {
        if mask.len() != self.n_samples() {
            return Err(Error::Shape(format!(
                "mask length {} does not match {} rows",
                mask.len(),
                self.n_samples()
            )));
        }
        let indices: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == 1)
            .map(|(i, _)| i)
            .collect();
        Ok(self.subset(&indices))
    }

    /// Distinct group values in sorted order, if a group column exists.
    pub fn group_values(&self) -> Option<Vec<String>> {
        self.group.as_ref().map(|g| {
            let set: BTreeSet<&String> = g.iter().collect();
            set.into_iter().cloned().collect()
        })
    }
}

/// Maps file columns to their roles when loading a CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    /// Name of the binary label column.
    pub label: String,
    /// Optional categorical group column (kept out of the predictors).
    pub group: Option<String>,
    /// Optional integer time column (kept out of the predictors).
    pub time: Option<String>,
}

impl CsvSchema {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            group: None,
            time: None,
        }
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    pub fn with_time(mut self, time: impl Into<String>) -> Self {
        self.time = Some(time.into());
        self
    }
}

fn parse_label(cell: &str) -> Option<u8> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "0" | "false" => Some(0),
        "1" | "true" => Some(1),
        _ => None,
    }
}

/// Loads an RFC-4180-style CSV (header row, UTF-8, "." decimals) into a
/// [`Dataset`]. Predictor columns keep their file order; the label,
/// group, and time columns named by the schema are excluded from the
/// predictors.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let find = |name: &str| headers.iter().position(|h| h == name);
    let label_idx = find(&schema.label)
        .ok_or_else(|| Error::Schema(format!("label column '{}' not found", schema.label)))?;
    let group_idx = match &schema.group {
        Some(g) => Some(
            find(g).ok_or_else(|| Error::Schema(format!("group column '{g}' not found")))?,
        ),
        None => None,
    };
    let time_idx = match &schema.time {
        Some(t) => {
            Some(find(t).ok_or_else(|| Error::Schema(format!("time column '{t}' not found")))?)
        }
        None => None,
    };
    let special: Vec<usize> = [Some(label_idx), group_idx, time_idx]
        .into_iter()
        .flatten()
        .collect();
    if special.len() != special.iter().collect::<BTreeSet<_>>().len() {
        return Err(Error::Schema(
            "label, group, and time columns must be distinct".into(),
        ));
    }

    let predictor_cols: Vec<usize> = (0..headers.len())
        .filter(|i| !special.contains(i))
        .collect();
    if predictor_cols.is_empty() {
        return Err(Error::Schema("no predictor columns in file".into()));
    }
    let predictor_names: Vec<String> = predictor_cols
        .iter()
        .map(|&i| headers[i].clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut group = group_idx.map(|_| Vec::new());
    let mut time = time_idx.map(|_| Vec::new());

    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_no + 1;
        if record.len() != headers.len() {
            return Err(Error::Load {
                row,
                column: String::new(),
                reason: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for &c in &predictor_cols {
            let cell = &record[c];
            let v: f64 = cell.trim().parse().map_err(|_| Error::Load {
                row,
                column: headers[c].clone(),
                reason: format!("cannot parse '{cell}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Load {
                    row,
                    column: headers[c].clone(),
                    reason: format!("non-finite predictor value '{cell}'"),
                });
            }
            values.push(v);
        }
        let cell = &record[label_idx];
        let l = parse_label(cell).ok_or_else(|| Error::Load {
            row,
            column: headers[label_idx].clone(),
            reason: format!("label '{cell}' is not one of 0/1/false/true"),
        })?;
        labels.push(l);
        if let (Some(g), Some(gi)) = (&mut group, group_idx) {
            g.push(record[gi].to_string());
        }
        if let (Some(t), Some(ti)) = (&mut time, time_idx) {
            let cell = &record[ti];
            let v: i64 = cell.trim().parse().map_err(|_| Error::Load {
                row,
                column: headers[ti].clone(),
                reason: format!("cannot parse '{cell}' as an integer time value"),
            })?;
            t.push(v);
        }
    }

    Dataset::new(predictor_names, values, labels, group, time)
}

/// Writes a dataset back to CSV with the schema's column names for the
/// label/group/time columns. Floats are written in shortest
/// round-trippable form, so `load_csv(write_csv(ds))` reproduces `ds`.
pub fn write_csv(ds: &Dataset, path: &Path, schema: &CsvSchema) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = ds.predictor_names().to_vec();
    header.push(schema.label.clone());
    if let Some(g) = &schema.group {
        header.push(g.clone());
    }
    if let Some(t) = &schema.time {
        header.push(t.clone());
    }
    writer.write_record(&header)?;
    for i in 0..ds.n_samples() {
        let mut record: Vec<String> = ds.row(i).iter().map(|v| format!("{v}")).collect();
        record.push(format!("{}", ds.labels()[i]));
        if schema.group.is_some() {
            let g = ds.group().ok_or_else(|| {
                Error::Schema("schema names a group column but dataset has none".into())
            })?;
            record.push(g[i].clone());
        }
        if schema.time.is_some() {
            let t = ds.time_index().ok_or_else(|| {
                Error::Schema("schema names a time column but dataset has none".into())
            })?;
            record.push(format!("{}", t[i]));
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads only the named columns from a CSV, in the given order, as rows
/// of finite floats. Used for prediction, where no label is required.
pub fn load_predictor_matrix(path: &Path, names: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut cols = Vec::with_capacity(names.len());
    for name in names {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("predictor column '{name}' not found")))?;
        cols.push(idx);
    }
    let mut rows = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(cols.len());
        for (&c, name) in cols.iter().zip(names) {
            let cell = record.get(c).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| Error::Load {
                row: row_no + 1,
                column: name.clone(),
                reason: format!("cannot parse '{cell}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Load {
                    row: row_no + 1,
                    column: name.clone(),
                    reason: format!("non-finite predictor value '{cell}'"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// One fit/eval split. Indices refer to rows of the source dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub fit: Vec<usize>,
    pub eval: Vec<usize>,
}

/// Ordered list of fit/eval splits with disjointness and (when a time
/// column exists) strict temporal ordering between fit and eval rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    /// Checks the plan invariants against a dataset: per-fold fit/eval
    /// disjointness, pairwise-disjoint eval sets across folds, and strict
    /// fit-before-eval time ordering when the dataset is time-indexed.
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        let n = ds.n_samples();
        let mut eval_seen = vec![false; n];
        for (k, fold) in self.folds.iter().enumerate() {
            let mut in_fit = vec![false; n];
            for &i in &fold.fit {
                if i >= n {
                    return Err(Error::Shape(format!("fold {k} fit index {i} out of range")));
                }
                in_fit[i] = true;
            }
            for &i in &fold.eval {
                if i >= n {
                    return Err(Error::Shape(format!(
                        "fold {k} eval index {i} out of range"
                    )));
                }
                if in_fit[i] {
                    return Err(Error::Partition(format!(
                        "fold {k} has row {i} in both fit and eval"
                    )));
                }
                if eval_seen[i] {
                    return Err(Error::Partition(format!(
                        "row {i} appears in multiple eval sets"
                    )));
                }
                eval_seen[i] = true;
            }
            if let Some(t) = ds.time_index() {
                let max_fit = fold.fit.iter().map(|&i| t[i]).max();
                let min_eval = fold.eval.iter().map(|&i| t[i]).min();
                if let (Some(mf), Some(me)) = (max_fit, min_eval) {
                    if mf >= me {
                        return Err(Error::Partition(format!(
                            "fold {k}: fit time {mf} does not precede eval time {me}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Forward-chaining temporal folds: fold k fits on the rows of the first
/// `initial_span + k` distinct time values and evaluates on the rows of
/// the next one.
pub fn partition_forward(ds: &Dataset, initial_span: usize, n_folds: usize) -> Result<FoldPlan> {
    if n_folds == 0 {
        return Err(Error::Config("n_folds must be positive".into()));
    }
    let times = ds
        .time_index()
        .ok_or_else(|| Error::Partition("dataset has no time column".into()))?;
    let distinct: Vec<i64> = {
        let set: BTreeSet<i64> = times.iter().copied().collect();
        set.into_iter().collect()
    };
    let needed = initial_span + n_folds;
    if distinct.len() < needed {
        return Err(Error::Partition(format!(
            "{} distinct time values, need at least {} (initial_span {} + n_folds {})",
            distinct.len(),
            needed,
            initial_span,
            n_folds
        )));
    }
    let mut folds = Vec::with_capacity(n_folds);
    for k in 0..n_folds {
        // fit on everything strictly before the eval value, which is the
        // (initial_span + k + 1)-th distinct time
        let eval_value = distinct[initial_span + k];
        let fit: Vec<usize> = (0..ds.n_samples())
            .filter(|&i| times[i] < eval_value)
            .collect();
        let eval: Vec<usize> = (0..ds.n_samples())
            .filter(|&i| times[i] == eval_value)
            .collect();
        folds.push(Fold { fit, eval });
    }
    let plan = FoldPlan { folds };
    plan.validate(ds)?;
    Ok(plan)
}

/// Parameters of the synthetic imbalanced-data generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_samples: usize,
    /// Positive-class probability.
    pub imbalance: f64,
    /// Predictors whose class-conditional means differ by `separation`.
    pub n_informative: usize,
    /// Predictors identically distributed across classes.
    pub n_noise: usize,
    /// Difference of class means in pooled-standard-deviation units.
    pub separation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            imbalance: 1e-4,
            n_informative: 1,
            n_noise: 4,
            separation: 3.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        if !(self.imbalance > 0.0 && self.imbalance <= 0.5) {
            return Err(Error::Config(format!(
                "imbalance {} outside (0, 0.5]",
                self.imbalance
            )));
        }
        if self.n_informative + self.n_noise == 0 {
            return Err(Error::Config(
                "need at least one informative or noise predictor".into(),
            ));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::Config(format!(
                "separation {} must be finite and nonnegative",
                self.separation
            )));
        }
        Ok(())
    }
}

/// Generates labels Bernoulli(imbalance) and unit-variance Gaussian
/// predictors; informative predictors have their class-1 mean shifted by
/// `separation`. A pure function of the config: the same seed yields a
/// bit-identical dataset.
pub fn synthesize(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels: Vec<u8> = (0..cfg.n_samples)
        .map(|_| u8::from(rng.gen::<f64>() < cfg.imbalance))
        .collect();
    let p = cfg.n_informative + cfg.n_noise;
    let mut values = Vec::with_capacity(cfg.n_samples * p);
    for &label in &labels {
        for j in 0..p {
            let mut v: f64 = rng.sample(StandardNormal);
            if j < cfg.n_informative && label == 1 {
                v += cfg.separation;
            }
            values.push(v);
        }
    }
    let names: Vec<String> = (0..p)
        .map(|j| {
            if j < cfg.n_informative {
                format!("inf{}", j + 1)
            } else {
                format!("noise{}", j + 1 - cfg.n_informative)
            }
        })
        .collect();
    Dataset::new(names, values, labels, None, None)
}
