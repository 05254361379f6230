//! `score`: validate questionnaire answers, extend the study's
//! trajectory, and render the two-axis diagram.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;
use serde::Deserialize;

use raresieve::repro::{
    append_assessment, load_trajectory, render_diagram, save_trajectory, Answer, Assessment,
    QuestionKey,
};
use raresieve::{Error, Result};

use crate::config::Context;

#[derive(Parser)]
pub struct Args {
    /// Questionnaire answers JSON:
    /// {study_id, timestamp, answers: {"fitting.1": 3, ...}, note}.
    #[arg(long)]
    answers: PathBuf,
    /// Study id; defaults to the answers file's study_id.
    #[arg(long)]
    study: Option<String>,
    /// Directory of per-study trajectory files.
    #[arg(long)]
    store: PathBuf,
    /// Region boundary on both axes.
    #[arg(long)]
    boundary: Option<f64>,
    /// Diagram output path; defaults to STORE/STUDY.svg.
    #[arg(long)]
    diagram: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswersFile {
    study_id: Option<String>,
    timestamp: String,
    answers: BTreeMap<String, Answer>,
    #[serde(default)]
    note: String,
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let boundary = ctx.boundary(args.boundary)?;
    let text = std::fs::read_to_string(&args.answers)?;
    let file: AnswersFile = serde_json::from_str(&text)?;

    let study = match (args.study, file.study_id) {
        (Some(flag), Some(in_file)) if flag != in_file => {
            return Err(Error::Config(format!(
                "--study '{flag}' conflicts with the answers file's study_id '{in_file}'"
            )));
        }
        (Some(flag), _) => flag,
        (None, Some(in_file)) => in_file,
        (None, None) => {
            return Err(Error::Config(
                "no study id: pass --study or set study_id in the answers file".into(),
            ));
        }
    };

    let mut answers: BTreeMap<QuestionKey, Answer> = BTreeMap::new();
    for (key, value) in file.answers {
        answers.insert(key.parse()?, value);
    }
    let assessment = Assessment::new(study.clone(), file.timestamp, answers, file.note)?;

    let trajectory = load_trajectory(&args.store, &study)?;
    let trajectory = append_assessment(&trajectory, &assessment, boundary)?;
    save_trajectory(&args.store, &trajectory)?;

    let diagram_path = args
        .diagram
        .unwrap_or_else(|| args.store.join(format!("{study}.svg")));
    render_diagram(&trajectory, &diagram_path)?;

    if !ctx.quiet {
        let entry = trajectory.entries.last().expect("just appended");
        let pos = &entry.position;
        println!("study: {study}");
        println!(
            "fitting {:.2}, inference {:.2}, region: {}",
            pos.fitting, pos.inference, entry.region.kind
        );
        println!(
            "  fitting   DS {:.2}  S {:.2}  M {:.2}",
            pos.fitting_categories.dataset,
            pos.fitting_categories.metrics,
            pos.fitting_categories.model
        );
        println!(
            "  inference DS {:.2}  S {:.2}  M {:.2}",
            pos.inference_categories.dataset,
            pos.inference_categories.metrics,
            pos.inference_categories.model
        );
        println!(
            "trajectory: {} entries, diagram: {}",
            trajectory.entries.len(),
            diagram_path.display()
        );
    }
    Ok(())
}
