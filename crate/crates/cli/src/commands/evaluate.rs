//! `evaluate`: score a model on labeled data, either directly or with
//! per-fold retraining (forward-chaining temporal folds), optionally
//! against a random-undersampling baseline.

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use raresieve::metrics::{FoldStats, MetricsReport};
use raresieve::pipeline::{self, FoldEvaluation, PipelineModelFile, TrainRecipe};
use raresieve::tabular::partition_forward;
use raresieve::{Error, Result};

use crate::config::Context;
use crate::table::fmt_mean_std;

use super::{load_dataset, parse_folds_spec, write_json};

#[derive(Parser)]
pub struct Args {
    /// Trained model JSON. In fold mode its embedded filter config and
    /// regularization define the per-fold retraining recipe.
    #[arg(long)]
    model: PathBuf,
    /// Labeled CSV to evaluate on.
    #[arg(long)]
    data: PathBuf,
    /// Label column name.
    #[arg(long)]
    label: Option<String>,
    /// Categorical column excluded from the predictors.
    #[arg(long)]
    group_column: Option<String>,
    /// Integer time column (required for --folds).
    #[arg(long)]
    time_column: Option<String>,
    /// Probability threshold for the confusion matrix.
    #[arg(long)]
    threshold: Option<f64>,
    /// Equal-width bins of the reliability curve.
    #[arg(long)]
    reliability_bins: Option<usize>,
    /// Calibration bins for per-fold retraining.
    #[arg(long)]
    calibration_bins: Option<usize>,
    /// Retrain per fold: INITIAL_SPAN,N_FOLDS over the time column.
    #[arg(long)]
    folds: Option<String>,
    /// Baseline to evaluate alongside (fold mode): random-undersample.
    #[arg(long)]
    baseline: Option<String>,
    /// Kept negatives per positive for the undersampling baseline.
    #[arg(long)]
    undersample_ratio: Option<f64>,
    /// Write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_report(rep: &MetricsReport) {
    let c = &rep.confusion;
    println!(
        "confusion: TP {} FP {} TN {} FN {}",
        c.true_positives, c.false_positives, c.true_negatives, c.false_negatives
    );
    println!("hit_rate            {:.4}", rep.hit_rate);
    println!("false_alarm_rate    {:.6}", rep.false_alarm_rate);
    println!("false_negative_rate {:.4}", rep.false_negative_rate);
    println!("f1                  {:.4}", rep.f1);
    println!("mcc                 {:.4}", rep.mcc);
    println!("brier               {:.6}", rep.brier);
    match rep.roc_auc {
        Some(a) => println!("roc_auc             {:.4}", a),
        None => println!("roc_auc             undefined (single class)"),
    }
    println!("reliability ({} nonempty bins):", rep.reliability.len());
    for b in &rep.reliability {
        println!(
            "  mean_p {:.4}  observed {:.4}  n {}",
            b.mean_predicted, b.observed_frequency, b.count
        );
    }
}

fn print_fold_stats(name: &str, stats: &FoldStats) {
    println!("{name} ({} folds):", stats.n_folds);
    println!("  hit_rate            {}", fmt_mean_std(stats.hit_rate.mean, stats.hit_rate.std));
    println!(
        "  false_alarm_rate    {}",
        fmt_mean_std(stats.false_alarm_rate.mean, stats.false_alarm_rate.std)
    );
    println!(
        "  false_negative_rate {}",
        fmt_mean_std(stats.false_negative_rate.mean, stats.false_negative_rate.std)
    );
    println!("  f1                  {}", fmt_mean_std(stats.f1.mean, stats.f1.std));
    println!("  mcc                 {}", fmt_mean_std(stats.mcc.mean, stats.mcc.std));
    println!("  brier               {}", fmt_mean_std(stats.brier.mean, stats.brier.std));
    if let Some(auc) = &stats.roc_auc {
        println!("  roc_auc             {}", fmt_mean_std(auc.mean, auc.std));
    }
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let label = ctx.label(args.label)?;
    let threshold = ctx.threshold(args.threshold)?;
    let reliability_bins = ctx.reliability_bins(args.reliability_bins);

    let text = std::fs::read_to_string(&args.model)?;
    let file: PipelineModelFile = serde_json::from_str(&text)?;
    let model = file.into_model()?;

    let group_column = ctx.group_column(args.group_column);
    let time_column = ctx.time_column(args.time_column);
    let ds = load_dataset(
        &args.data,
        &label,
        group_column.as_deref(),
        time_column.as_deref(),
    )?;

    if let Some(b) = &args.baseline {
        if b != "random-undersample" {
            return Err(Error::Config(format!(
                "unknown baseline '{b}'; supported: random-undersample"
            )));
        }
        if args.folds.is_none() {
            return Err(Error::Config(
                "--baseline needs --folds for per-fold retraining".into(),
            ));
        }
    }

    let provenance = ctx.provenance(
        "evaluate",
        json!({
            "label": label,
            "group_column": group_column,
            "time_column": time_column,
            "threshold": threshold,
            "reliability_bins": reliability_bins,
            "folds": args.folds,
            "baseline": args.baseline,
        }),
    );

    match &args.folds {
        None => {
            let probs: Vec<f64> = pipeline::predict_dataset(&model, &ds)?
                .iter()
                .map(|p| p.probability)
                .collect();
            let report =
                MetricsReport::from_probabilities(&probs, ds.labels(), threshold, reliability_bins)?;
            if !ctx.quiet {
                print_report(&report);
            }
            if let Some(out) = &args.out {
                write_json(out, &json!({ "report": report, "provenance": provenance }))?;
                if !ctx.quiet {
                    println!("wrote {}", out.display());
                }
            }
        }
        Some(spec) => {
            let (initial, n_folds) = parse_folds_spec(spec)?;
            let plan = partition_forward(&ds, initial, n_folds)?;
            let n_bins = ctx.calibration_bins(args.calibration_bins);
            let recipe = match &model.filter {
                Some(f) => TrainRecipe::Ddf {
                    ddf: f.config.clone(),
                    regularization: model.lda.regularization,
                    n_bins,
                },
                None => TrainRecipe::Plain {
                    regularization: model.lda.regularization,
                    n_bins,
                },
            };
            let main: FoldEvaluation =
                pipeline::evaluate_folds(&ds, &plan, &recipe, threshold, reliability_bins)?;
            let baseline = match &args.baseline {
                Some(_) => {
                    let ratio = ctx.undersample_ratio(args.undersample_ratio);
                    let recipe = TrainRecipe::Undersample {
                        ratio,
                        seed: ctx.seed,
                        regularization: model.lda.regularization,
                        n_bins,
                    };
                    Some(pipeline::evaluate_folds(
                        &ds,
                        &plan,
                        &recipe,
                        threshold,
                        reliability_bins,
                    )?)
                }
                None => None,
            };
            if !ctx.quiet {
                print_fold_stats("model", &main.stats);
                if !main.excluded_folds.is_empty() {
                    println!("  excluded folds: {:?}", main.excluded_folds);
                }
                if let Some(b) = &baseline {
                    print_fold_stats("baseline random-undersample", &b.stats);
                    if !b.excluded_folds.is_empty() {
                        println!("  excluded folds: {:?}", b.excluded_folds);
                    }
                }
            }
            if let Some(out) = &args.out {
                write_json(
                    out,
                    &json!({
                        "folds": main,
                        "baseline": baseline,
                        "provenance": provenance,
                    }),
                )?;
                if !ctx.quiet {
                    println!("wrote {}", out.display());
                }
            }
        }
    }
    Ok(())
}
