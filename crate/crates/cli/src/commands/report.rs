//! `report`: print a study's stored trajectory and re-render its
//! diagram.

use std::path::PathBuf;

use clap::Parser;

use raresieve::repro::{load_trajectory, render_diagram};
use raresieve::{Error, Result};

use crate::config::Context;

#[derive(Parser)]
pub struct Args {
    /// Study id to report on.
    #[arg(long)]
    study: String,
    /// Directory of per-study trajectory files.
    #[arg(long)]
    store: PathBuf,
    /// Diagram output path; defaults to STORE/STUDY.svg.
    #[arg(long)]
    diagram: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let trajectory = load_trajectory(&args.store, &args.study)?;
    if trajectory.entries.is_empty() {
        return Err(Error::Validation(format!(
            "no trajectory recorded for study '{}' under {}",
            args.study,
            args.store.display()
        )));
    }
    if !ctx.quiet {
        println!("study: {}", args.study);
        println!("{:<28} {:>8} {:>10} region", "timestamp", "fitting", "inference");
        for e in &trajectory.entries {
            println!(
                "{:<28} {:>8.2} {:>10.2} {}",
                e.timestamp, e.position.fitting, e.position.inference, e.region.kind
            );
        }
    }
    let diagram_path = args
        .diagram
        .unwrap_or_else(|| args.store.join(format!("{}.svg", args.study)));
    render_diagram(&trajectory, &diagram_path)?;
    if !ctx.quiet {
        println!("diagram: {}", diagram_path.display());
    }
    Ok(())
}
