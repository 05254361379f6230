//! Run configuration: a JSON config file whose values command-line
//! flags override, plus the provenance block echoed into every JSON
//! artifact.

use std::path::Path;

use serde::Deserialize;
use serde_json::json;

use raresieve::ddf::DdfConfig;
use raresieve::{Error, Result};

/// Optional values loadable from `--config FILE`. Unknown keys are
/// rejected so typos surface instead of silently using defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub label: Option<String>,
    pub group_column: Option<String>,
    pub time_column: Option<String>,
    pub lambda: Option<f64>,
    pub quantile_grid: Option<Vec<f64>>,
    pub tail_split: Option<f64>,
    pub stop_score: Option<f64>,
    pub max_passes: Option<usize>,
    pub regularization: Option<f64>,
    pub calibration_bins: Option<usize>,
    pub reliability_bins: Option<usize>,
    pub threshold: Option<f64>,
    pub boundary: Option<f64>,
    pub undersample_ratio: Option<f64>,
}

/// Global state shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub file: FileConfig,
    pub seed: u64,
    pub quiet: bool,
}

impl Context {
    pub fn load(config: Option<&Path>, seed_flag: Option<u64>, quiet: bool) -> Result<Self> {
        let file = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read config file {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    Error::Config(format!("bad config file {}: {e}", path.display()))
                })?
            }
            None => FileConfig::default(),
        };
        let seed = seed_flag.or(file.seed).unwrap_or(0);
        Ok(Self { file, seed, quiet })
    }

    /// The label column name, required by data-loading commands.
    pub fn label(&self, flag: Option<String>) -> Result<String> {
        flag.or_else(|| self.file.label.clone())
            .ok_or_else(|| Error::Config("a label column is required (--label)".into()))
    }

    pub fn group_column(&self, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.file.group_column.clone())
    }

    pub fn time_column(&self, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.file.time_column.clone())
    }

    /// Assembles the filter-search config from flags over file values
    /// over defaults, then validates it.
    #[allow(clippy::too_many_arguments)]
    pub fn ddf_config(
        &self,
        lambda: Option<f64>,
        quantile_grid: Option<Vec<f64>>,
        tail_split: Option<f64>,
        stop_score: Option<f64>,
        max_passes: Option<usize>,
    ) -> Result<DdfConfig> {
        let defaults = DdfConfig::default();
        let cfg = DdfConfig {
            lambda: lambda.or(self.file.lambda).unwrap_or(defaults.lambda),
            quantile_grid: quantile_grid
                .or_else(|| self.file.quantile_grid.clone())
                .unwrap_or(defaults.quantile_grid),
            tail_split: tail_split
                .or(self.file.tail_split)
                .unwrap_or(defaults.tail_split),
            stop_score: stop_score
                .or(self.file.stop_score)
                .unwrap_or(defaults.stop_score),
            max_passes: max_passes.or(self.file.max_passes),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn regularization(&self, flag: Option<f64>) -> f64 {
        flag.or(self.file.regularization).unwrap_or(0.0)
    }

    pub fn calibration_bins(&self, flag: Option<usize>) -> usize {
        flag.or(self.file.calibration_bins).unwrap_or(10)
    }

    pub fn reliability_bins(&self, flag: Option<usize>) -> usize {
        flag.or(self.file.reliability_bins).unwrap_or(10)
    }

    pub fn boundary(&self, flag: Option<f64>) -> Result<f64> {
        let b = flag.or(self.file.boundary).unwrap_or(0.5);
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Config(format!(
                "region boundary {b} outside (0, 1)"
            )));
        }
        Ok(b)
    }

    pub fn threshold(&self, flag: Option<f64>) -> Result<f64> {
        let t = flag.or(self.file.threshold).ok_or_else(|| {
            Error::Config("a probability threshold is required (--threshold)".into())
        })?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
        }
        Ok(t)
    }

    pub fn undersample_ratio(&self, flag: Option<f64>) -> f64 {
        flag.or(self.file.undersample_ratio).unwrap_or(1.0)
    }

    /// Provenance block for JSON artifacts: the command, the seed, and
    /// the effective config. Deliberately free of timestamps and paths
    /// so reruns with identical inputs produce identical bytes.
    pub fn provenance(&self, command: &str, effective: serde_json::Value) -> serde_json::Value {
        json!({
            "command": command,
            "seed": self.seed,
            "config": effective,
        })
    }
}

/// Splits an output path into `<stem>.<group>.<ext>` for per-group
/// artifacts, sanitizing the group value for file-system use.
pub fn group_path(out: &Path, group: &str) -> std::path::PathBuf {
    let sanitized: String = group
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let ext = out
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "json".into());
    out.with_file_name(format!("{stem}.{sanitized}.{ext}"))
}
