//! `train`: fit the filter -> discriminant -> calibration chain and
//! serialize it with provenance.

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use raresieve::ddf::FilterModelFile;
use raresieve::pipeline;
use raresieve::Result;

use crate::config::{group_path, Context};

use super::{load_dataset, sha256_file, split_groups, write_json};

#[derive(Parser)]
pub struct Args {
    /// Labeled training CSV.
    #[arg(long)]
    data: PathBuf,
    /// Label column name.
    #[arg(long)]
    label: Option<String>,
    /// Categorical column: one model is trained per group value.
    #[arg(long)]
    group_column: Option<String>,
    /// Integer time column (excluded from the predictors).
    #[arg(long)]
    time_column: Option<String>,
    /// Filter to apply before fitting; omit to train unfiltered.
    #[arg(long)]
    filter: Option<PathBuf>,
    /// Ridge added to the pooled covariance diagonal.
    #[arg(long)]
    regularization: Option<f64>,
    /// Equal-count bins for the calibration map.
    #[arg(long)]
    calibration_bins: Option<usize>,
    /// Output model path (per-group files get a .GROUP suffix).
    #[arg(long)]
    out: PathBuf,
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let label = ctx.label(args.label)?;
    let regularization = ctx.regularization(args.regularization);
    let n_bins = ctx.calibration_bins(args.calibration_bins);
    let group_column = ctx.group_column(args.group_column);
    let time_column = ctx.time_column(args.time_column);
    let ds = load_dataset(
        &args.data,
        &label,
        group_column.as_deref(),
        time_column.as_deref(),
    )?;

    let (filter_file, filter_hash) = match &args.filter {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let file: FilterModelFile = serde_json::from_str(&text)?;
            (Some(file), Some(sha256_file(path)?))
        }
        None => (None, None),
    };

    let provenance = ctx.provenance(
        "train",
        json!({
            "label": label,
            "group_column": group_column,
            "time_column": time_column,
            "regularization": regularization,
            "calibration_bins": n_bins,
            "filter_hash": filter_hash,
        }),
    );

    for (group, subset) in split_groups(&ds) {
        let filter = match &filter_file {
            Some(f) => Some(f.bind(subset.predictor_names())?),
            None => None,
        };
        let model = pipeline::train(&subset, filter.as_ref(), regularization, n_bins)?;
        let out = match &group {
            Some(g) => group_path(&args.out, g),
            None => args.out.clone(),
        };
        write_json(&out, &model.to_file(Some(provenance.clone())))?;
        if !ctx.quiet {
            let rules = model.filter.as_ref().map_or(0, |f| f.rules.len());
            println!(
                "{}trained on {} rows ({} positives), {} filter rule(s), wrote {}",
                group.as_deref().map(|g| format!("group {g}: ")).unwrap_or_default(),
                subset.n_samples(),
                subset.n_positives(),
                rules,
                out.display()
            );
        }
    }
    Ok(())
}
