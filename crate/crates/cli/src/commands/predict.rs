//! `predict`: apply a trained model to a CSV, matching predictor
//! columns by name.

use std::path::PathBuf;

use clap::Parser;

use raresieve::pipeline::{self, PipelineModelFile};
use raresieve::repro::write_atomic;
use raresieve::tabular::load_predictor_matrix;
use raresieve::Result;

use crate::config::Context;

#[derive(Parser)]
pub struct Args {
    /// Trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// CSV to predict; must contain the model's predictor columns.
    #[arg(long)]
    data: PathBuf,
    /// Output CSV: row_id, discriminant, probability, selected.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let text = std::fs::read_to_string(&args.model)?;
    let file: PipelineModelFile = serde_json::from_str(&text)?;
    let model = file.into_model()?;

    let rows = load_predictor_matrix(&args.data, &model.lda.predictor_names)?;
    let predictions = pipeline::predict_matrix(&model, &rows)?;

    let mut out = String::from("row_id,discriminant,probability,selected\n");
    for (i, p) in predictions.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{}\n",
            p.discriminant,
            p.probability,
            u8::from(p.selected)
        ));
    }
    write_atomic(&args.out, out.as_bytes())?;
    if !ctx.quiet {
        let selected = predictions.iter().filter(|p| p.selected).count();
        println!(
            "predicted {} rows ({selected} selected by the filter), wrote {}",
            predictions.len(),
            args.out.display()
        );
    }
    Ok(())
}
