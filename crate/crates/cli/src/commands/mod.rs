//! Subcommand implementations. All heavy lifting lives in the library;
//! these modules parse flags, move bytes, and format text.

pub mod evaluate;
pub mod filter_learn;
pub mod predict;
pub mod report;
pub mod score;
pub mod train;

use std::path::Path;

use sha2::{Digest, Sha256};

use raresieve::repro::write_atomic;
use raresieve::tabular::{load_csv, CsvSchema, Dataset};
use raresieve::Result;

/// Loads a labeled CSV with the label/group/time roles applied.
pub fn load_dataset(
    path: &Path,
    label: &str,
    group: Option<&str>,
    time: Option<&str>,
) -> Result<Dataset> {
    let mut schema = CsvSchema::new(label);
    if let Some(g) = group {
        schema = schema.with_group(g);
    }
    if let Some(t) = time {
        schema = schema.with_time(t);
    }
    load_csv(path, &schema)
}

/// Pretty-printed JSON with a trailing newline, written atomically.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Hex SHA-256 of a file's bytes, used to pin filter provenance.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Splits a dataset into (group value, row subset) pairs in sorted
/// group order, or returns the whole dataset unkeyed when no group
/// column is in play.
pub fn split_groups(ds: &Dataset) -> Vec<(Option<String>, Dataset)> {
    match ds.group_values() {
        Some(values) if !values.is_empty() => {
            let groups = ds.group().expect("group column present");
            values
                .into_iter()
                .map(|v| {
                    let indices: Vec<usize> =
                        (0..ds.n_samples()).filter(|&i| groups[i] == v).collect();
                    (Some(v), ds.subset(&indices))
                })
                .collect()
        }
        _ => vec![(None, ds.subset(&(0..ds.n_samples()).collect::<Vec<_>>()))],
    }
}

/// Parses `--folds INITIAL_SPAN,N_FOLDS`.
pub fn parse_folds_spec(spec: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(raresieve::Error::Config(format!(
            "fold spec '{spec}' must be INITIAL_SPAN,N_FOLDS"
        )));
    }
    let initial: usize = parts[0].trim().parse().map_err(|_| {
        raresieve::Error::Config(format!("bad initial span in fold spec '{spec}'"))
    })?;
    let folds: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| raresieve::Error::Config(format!("bad fold count in fold spec '{spec}'")))?;
    Ok((initial, folds))
}
