//! `filter-learn`: sequential threshold selection on a labeled CSV.

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use raresieve::ddf::{cross_fold_scores, pass_table, select_sequential};
use raresieve::tabular::partition_forward;
use raresieve::Result;

use crate::config::{group_path, Context};
use crate::table::{fmt_mean_std, fmt_tau};

use super::{load_dataset, parse_folds_spec, split_groups, write_json};

#[derive(Parser)]
pub struct Args {
    /// Labeled CSV to learn thresholds from.
    #[arg(long)]
    data: PathBuf,
    /// Label column name.
    #[arg(long)]
    label: Option<String>,
    /// Categorical column: one filter is learned per group value.
    #[arg(long)]
    group_column: Option<String>,
    /// Integer time column (needed for --folds).
    #[arg(long)]
    time_column: Option<String>,
    /// FNR weight in the selection score.
    #[arg(long)]
    lambda: Option<f64>,
    /// Candidate quantile budgets, comma separated.
    #[arg(long, value_delimiter = ',')]
    quantile_grid: Option<Vec<f64>>,
    /// Fraction of each budget spent on the lower tail.
    #[arg(long)]
    tail_split: Option<f64>,
    /// Stop once the best candidate scores at or above this; 0 disables.
    #[arg(long)]
    stop_score: Option<f64>,
    /// Maximum number of selected rules.
    #[arg(long)]
    max_passes: Option<usize>,
    /// Also report cross-fold score spread: INITIAL_SPAN,N_FOLDS.
    #[arg(long)]
    folds: Option<String>,
    /// Output filter path (per-group files get a .GROUP suffix).
    #[arg(long)]
    out: PathBuf,
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let label = ctx.label(args.label)?;
    let cfg = ctx.ddf_config(
        args.lambda,
        args.quantile_grid,
        args.tail_split,
        args.stop_score,
        args.max_passes,
    )?;
    let group_column = ctx.group_column(args.group_column);
    let time_column = ctx.time_column(args.time_column);
    let ds = load_dataset(
        &args.data,
        &label,
        group_column.as_deref(),
        time_column.as_deref(),
    )?;
    let provenance = ctx.provenance(
        "filter-learn",
        json!({
            "label": label,
            "group_column": group_column,
            "time_column": time_column,
            "ddf": cfg,
        }),
    );

    let groups = split_groups(&ds);
    let multi = groups.len() > 1 || groups[0].0.is_some();
    for (group, subset) in groups {
        let model = select_sequential(&subset, &cfg)?;
        let out = match &group {
            Some(g) => group_path(&args.out, g),
            None => args.out.clone(),
        };
        let mut file = model.to_file();
        file.provenance = Some(provenance.clone());
        write_json(&out, &file)?;

        if model.rules.is_empty() {
            eprintln!(
                "warning: no predictor scored below the stop score{}; the filter selects everything",
                group.as_deref().map(|g| format!(" for group {g}")).unwrap_or_default()
            );
        }
        if !ctx.quiet {
            if let Some(g) = &group {
                println!("group: {g}");
            }
            let rows = pass_table(&subset, &model)?;
            println!(
                "{:<4} {:<16} {:>14} {:>14} {:>8} {:>8} {:>9} {:>8}",
                "pass", "predictor", "tau_min", "tau_max", "fnr", "far", "weighted", "cum_fnr"
            );
            for r in &rows {
                println!(
                    "{:<4} {:<16} {:>14} {:>14} {:>8.4} {:>8.4} {:>9.4} {:>8.4}",
                    r.pass,
                    r.predictor_name,
                    fmt_tau(r.tau_min),
                    fmt_tau(r.tau_max),
                    r.score.fnr,
                    r.score.far,
                    r.score.weighted,
                    r.cumulative_fnr
                );
            }
            println!("status: {:?}, wrote {}", model.status, out.display());

            if let Some(spec) = &args.folds {
                let (initial, n_folds) = parse_folds_spec(spec)?;
                let plan = partition_forward(&subset, initial, n_folds)?;
                let cfs = cross_fold_scores(&subset, &plan, &cfg)?;
                println!("cross-fold pass scores ({n_folds} folds):");
                for (i, p) in cfs.passes.iter().enumerate() {
                    println!(
                        "  pass {} {} {}",
                        i + 1,
                        p.predictor.as_deref().unwrap_or("(folds disagree)"),
                        fmt_mean_std(p.mean_weighted, p.std_weighted)
                    );
                }
                if !cfs.excluded_folds.is_empty() {
                    println!("  excluded folds: {:?}", cfs.excluded_folds);
                }
                if cfs.predictor_disagreement {
                    println!("  note: folds disagreed on the winning predictor");
                }
            }
            if multi {
                println!();
            }
        }
    }
    Ok(())
}
