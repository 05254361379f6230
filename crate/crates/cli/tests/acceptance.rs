//! Acceptance criterion: rerunning any command with identical inputs,
//! config, and seed produces byte-identical JSON/CSV/SVG outputs.

use std::path::{Path, PathBuf};
use std::process::Command;

use raresieve::tabular::{synthesize, write_csv, CsvSchema, Dataset, SynthConfig};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_raresieve")
}

fn run_ok(dir: &Path, args: &[&str]) {
    let out = Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_inputs(dir: &Path) {
    let base = synthesize(&SynthConfig {
        n_samples: 15_000,
        imbalance: 5e-3,
        n_informative: 1,
        n_noise: 2,
        separation: 3.0,
        seed: 1212,
    })
    .unwrap();
    let times: Vec<i64> = (0..base.n_samples()).map(|i| (i % 7) as i64).collect();
    let values: Vec<f64> = (0..base.n_samples())
        .flat_map(|i| base.row(i).to_vec())
        .collect();
    let ds = Dataset::new(
        base.predictor_names().to_vec(),
        values,
        base.labels().to_vec(),
        None,
        Some(times),
    )
    .unwrap();
    write_csv(
        &ds,
        &dir.join("data.csv"),
        &CsvSchema::new("label").with_time("year"),
    )
    .unwrap();

    let mut answers = serde_json::Map::new();
    for n in 1..=17 {
        answers.insert(format!("fitting.{n}"), serde_json::json!(n % 4));
    }
    for n in 1..=14 {
        answers.insert(format!("inference.{n}"), serde_json::json!((n + 1) % 4));
    }
    let doc = serde_json::json!({
        "study_id": "determinism",
        "timestamp": "2024-01-01T00:00:00Z",
        "answers": answers,
        "note": "fixed input"
    });
    std::fs::write(
        dir.join("answers.json"),
        serde_json::to_string_pretty(&doc).unwrap(),
    )
    .unwrap();
}

/// Runs the full command set in a fresh directory and returns the
/// artifacts it produced.
fn run_everything(dir: &Path) -> Vec<(String, Vec<u8>)> {
    write_inputs(dir);
    run_ok(
        dir,
        &[
            "filter-learn",
            "--data",
            "data.csv",
            "--label",
            "label",
            "--time-column",
            "year",
            "--seed",
            "7",
            "--out",
            "filter.json",
        ],
    );
    run_ok(
        dir,
        &[
            "train",
            "--data",
            "data.csv",
            "--label",
            "label",
            "--time-column",
            "year",
            "--filter",
            "filter.json",
            "--seed",
            "7",
            "--out",
            "model.json",
        ],
    );
    run_ok(
        dir,
        &[
            "predict",
            "--model",
            "model.json",
            "--data",
            "data.csv",
            "--seed",
            "7",
            "--out",
            "predictions.csv",
        ],
    );
    run_ok(
        dir,
        &[
            "evaluate",
            "--model",
            "model.json",
            "--data",
            "data.csv",
            "--label",
            "label",
            "--time-column",
            "year",
            "--threshold",
            "0.05",
            "--seed",
            "7",
            "--out",
            "metrics.json",
        ],
    );
    run_ok(
        dir,
        &[
            "evaluate",
            "--model",
            "model.json",
            "--data",
            "data.csv",
            "--label",
            "label",
            "--time-column",
            "year",
            "--threshold",
            "0.05",
            "--folds",
            "3,3",
            "--baseline",
            "random-undersample",
            "--undersample-ratio",
            "4",
            "--seed",
            "7",
            "--out",
            "fold_metrics.json",
        ],
    );
    run_ok(
        dir,
        &[
            "score",
            "--answers",
            "answers.json",
            "--store",
            "store",
            "--seed",
            "7",
        ],
    );
    run_ok(dir, &["report", "--study", "determinism", "--store", "store"]);

    let artifacts = [
        "filter.json",
        "model.json",
        "predictions.csv",
        "metrics.json",
        "fold_metrics.json",
        "store/determinism.jsonl",
        "store/determinism.svg",
    ];
    artifacts
        .iter()
        .map(|name| {
            let path: PathBuf = dir.join(name);
            (name.to_string(), std::fs::read(&path).expect("artifact exists"))
        })
        .collect()
}

#[test]
fn criterion_12_cli_determinism() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let a = run_everything(dir_a.path());
    let b = run_everything(dir_b.path());
    assert_eq!(a.len(), b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a, name_b);
        assert_eq!(
            bytes_a, bytes_b,
            "artifact {name_a} differs between identical runs"
        );
    }
    println!(
        "criterion 12 PASS: {} artifacts byte-identical across independent reruns",
        a.len()
    );
}
