//! Two-axis reproduction/replication scorecard.
//!
//! A study's position is a pair of [0, 1] coordinates: the fitting axis
//! measures confidence that the base study's training could be
//! reproduced, the inference axis the same for its evaluation. Both are
//! scored from the built-in questionnaire (answers 0-3 per question),
//! classified into one of four diagram regions, and tracked over time
//! as a trajectory.

mod diagram;
mod questionnaire;

pub use diagram::{render_diagram, write_atomic};
pub use questionnaire::{builtin_questionnaire, Axis, Category, Question, QuestionKey};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One answer on the 0-3 equivalence scale. "Not applicable" and
/// unanswered questions both score 0, but the distinction is kept so
/// reports can tell disagreement from inapplicability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Scored(u8),
    NotApplicable,
    Unanswered,
}

impl Answer {
    /// Contribution to the axis score.
    pub fn value(&self) -> u8 {
        match self {
            Answer::Scored(v) => *v,
            Answer::NotApplicable | Answer::Unanswered => 0,
        }
    }
}

impl Serialize for Answer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Answer::Scored(v) => s.serialize_u8(*v),
            Answer::NotApplicable => s.serialize_str("na"),
            Answer::Unanswered => s.serialize_str("unanswered"),
        }
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Answer;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer 0-3, \"na\", or \"unanswered\"")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Answer, E> {
                if v <= 3 {
                    Ok(Answer::Scored(v as u8))
                } else {
                    Err(E::custom(format!("answer {v} outside 0-3")))
                }
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Answer, E> {
                if (0..=3).contains(&v) {
                    Ok(Answer::Scored(v as u8))
                } else {
                    Err(E::custom(format!("answer {v} outside 0-3")))
                }
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Answer, E> {
                match v.to_ascii_lowercase().as_str() {
                    "na" | "n/a" => Ok(Answer::NotApplicable),
                    "unanswered" => Ok(Answer::Unanswered),
                    _ => Err(E::custom(format!("unrecognized answer '{v}'"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A completed (possibly partially answered) questionnaire for one
/// study at one point in time. Every one of the 31 built-in questions
/// is present in `answers`; those the author did not answer are stored
/// explicitly as [`Answer::Unanswered`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assessment {
    pub study_id: String,
    /// ISO-8601 / RFC 3339 timestamp, e.g. `2024-05-01T12:00:00Z`.
    pub timestamp: String,
    pub answers: BTreeMap<QuestionKey, Answer>,
    #[serde(default)]
    pub note: String,
}

fn parse_timestamp(ts: &str) -> Result<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(ts)
        .map_err(|e| Error::Validation(format!("timestamp '{ts}' is not RFC 3339: {e}")))
}

impl Assessment {
    /// Builds an assessment from possibly partial answers. Unknown
    /// question keys are rejected with the list of valid keys; missing
    /// questions are recorded as unanswered.
    pub fn new(
        study_id: impl Into<String>,
        timestamp: impl Into<String>,
        answers: BTreeMap<QuestionKey, Answer>,
        note: impl Into<String>,
    ) -> Result<Self> {
        let timestamp = timestamp.into();
        parse_timestamp(&timestamp)?;
        let valid: Vec<QuestionKey> = builtin_questionnaire().iter().map(Question::key).collect();
        for key in answers.keys() {
            if !valid.contains(key) {
                let keys: Vec<String> = valid.iter().map(QuestionKey::to_string).collect();
                return Err(Error::Validation(format!(
                    "unknown question key '{key}'; valid keys: {}",
                    keys.join(", ")
                )));
            }
        }
        let mut full = answers;
        for key in valid {
            full.entry(key).or_insert(Answer::Unanswered);
        }
        Ok(Self {
            study_id: study_id.into(),
            timestamp,
            answers: full,
            note: note.into(),
        })
    }

    /// Revalidates a deserialized assessment: the key set must be
    /// exactly the built-in questionnaire and the timestamp parseable.
    pub fn validate(&self) -> Result<()> {
        parse_timestamp(&self.timestamp)?;
        let valid: Vec<QuestionKey> = builtin_questionnaire().iter().map(Question::key).collect();
        if self.answers.len() != valid.len()
            || !valid.iter().all(|k| self.answers.contains_key(k))
        {
            return Err(Error::Validation(
                "assessment answers do not cover exactly the built-in questionnaire".into(),
            ));
        }
        Ok(())
    }
}

/// Per-category sub-scores of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryScores {
    pub dataset: f64,
    pub metrics: f64,
    pub model: f64,
}

/// Position on the two axes, with DS/S/M sub-scores for each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisPosition {
    pub fitting: f64,
    pub inference: f64,
    pub fitting_categories: CategoryScores,
    pub inference_categories: CategoryScores,
}

/// Scores an assessment: each axis (and each category within it) is the
/// sum of its answers divided by three times its question count.
pub fn score_axes(a: &Assessment) -> AxisPosition {
    let questions = builtin_questionnaire();
    let score = |axis: Axis, category: Option<Category>| -> f64 {
        let mut sum = 0u32;
        let mut count = 0u32;
        for q in questions.iter().filter(|q| q.axis == axis) {
            if category.is_some_and(|c| c != q.category) {
                continue;
            }
            sum += u32::from(a.answers.get(&q.key()).map_or(0, Answer::value));
            count += 1;
        }
        f64::from(sum) / (3.0 * f64::from(count))
    };
    AxisPosition {
        fitting: score(Axis::Fitting, None),
        inference: score(Axis::Inference, None),
        fitting_categories: CategoryScores {
            dataset: score(Axis::Fitting, Some(Category::Dataset)),
            metrics: score(Axis::Fitting, Some(Category::Metrics)),
            model: score(Axis::Fitting, Some(Category::Model)),
        },
        inference_categories: CategoryScores {
            dataset: score(Axis::Inference, Some(Category::Dataset)),
            metrics: score(Axis::Inference, Some(Category::Metrics)),
            model: score(Axis::Inference, Some(Category::Model)),
        },
    }
}

/// The four diagram quadrants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    NotStarted,
    FittingOnly,
    SuccessfulReproduction,
    InferenceOnly,
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionKind::NotStarted => f.write_str("NotStarted"),
            RegionKind::FittingOnly => f.write_str("FittingOnly"),
            RegionKind::SuccessfulReproduction => f.write_str("SuccessfulReproduction"),
            RegionKind::InferenceOnly => f.write_str("InferenceOnly"),
        }
    }
}

/// A quadrant together with the boundary it was classified at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub boundary: f64,
}

/// Pure quadrant classification of an axis position.
pub fn classify_region(pos: &AxisPosition, boundary: f64) -> Region {
    let kind = match (pos.fitting >= boundary, pos.inference >= boundary) {
        (false, false) => RegionKind::NotStarted,
        (true, false) => RegionKind::FittingOnly,
        (true, true) => RegionKind::SuccessfulReproduction,
        (false, true) => RegionKind::InferenceOnly,
    };
    Region { kind, boundary }
}

/// One scored point of a study's history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub timestamp: String,
    pub position: AxisPosition,
    pub region: Region,
}

/// Time-ordered positions of one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub study_id: String,
    pub entries: Vec<TrajectoryEntry>,
}

impl Trajectory {
    pub fn new(study_id: impl Into<String>) -> Self {
        Self {
            study_id: study_id.into(),
            entries: Vec::new(),
        }
    }
}

/// Scores an assessment and appends it to the trajectory. The
/// assessment's timestamp must be strictly later than the last entry's.
pub fn append_assessment(t: &Trajectory, a: &Assessment, boundary: f64) -> Result<Trajectory> {
    a.validate()?;
    if !(boundary > 0.0 && boundary < 1.0) {
        return Err(Error::Config(format!(
            "region boundary {boundary} outside (0, 1)"
        )));
    }
    let ts = parse_timestamp(&a.timestamp)?;
    if let Some(last) = t.entries.last() {
        let last_ts = parse_timestamp(&last.timestamp)?;
        if ts <= last_ts {
            return Err(Error::TimestampOrder(format!(
                "'{}' is not strictly after the last entry '{}'",
                a.timestamp, last.timestamp
            )));
        }
    }
    let position = score_axes(a);
    let region = classify_region(&position, boundary);
    let mut out = t.clone();
    out.entries.push(TrajectoryEntry {
        timestamp: a.timestamp.clone(),
        position,
        region,
    });
    Ok(out)
}

/// Study ids become file names, so they are restricted to a safe
/// character set.
pub fn validate_study_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::Validation("study id is empty".into()));
    }
    if id.starts_with('.') {
        return Err(Error::Validation(format!(
            "study id '{id}' must not start with '.'"
        )));
    }
    if let Some(c) = id
        .chars()
        .find(|c| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-')))
    {
        return Err(Error::Validation(format!(
            "study id '{id}' contains unsupported character '{c}'; use [A-Za-z0-9._-]"
        )));
    }
    Ok(())
}

fn trajectory_path(store: &Path, study_id: &str) -> PathBuf {
    store.join(format!("{study_id}.jsonl"))
}

/// Loads a study's trajectory from its JSON-lines file under `store`,
/// or returns an empty trajectory when no file exists.
pub fn load_trajectory(store: &Path, study_id: &str) -> Result<Trajectory> {
    validate_study_id(study_id)?;
    let path = trajectory_path(store, study_id);
    if !path.exists() {
        return Ok(Trajectory::new(study_id));
    }
    let text = std::fs::read_to_string(&path)?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: TrajectoryEntry = serde_json::from_str(line).map_err(|e| {
            Error::Validation(format!(
                "{}: line {} is not a trajectory entry: {e}",
                path.display(),
                i + 1
            ))
        })?;
        entries.push(entry);
    }
    Ok(Trajectory {
        study_id: study_id.to_string(),
        entries,
    })
}

/// Writes a trajectory as one JSON object per line, atomically.
pub fn save_trajectory(store: &Path, t: &Trajectory) -> Result<()> {
    validate_study_id(&t.study_id)?;
    std::fs::create_dir_all(store)?;
    let mut text = String::new();
    for entry in &t.entries {
        text.push_str(&serde_json::to_string(entry)?);
        text.push('\n');
    }
    write_atomic(&trajectory_path(store, &t.study_id), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_scored(v: u8) -> BTreeMap<QuestionKey, Answer> {
        builtin_questionnaire()
            .iter()
            .map(|q| (q.key(), Answer::Scored(v)))
            .collect()
    }

    fn assessment(ts: &str, answers: BTreeMap<QuestionKey, Answer>) -> Assessment {
        Assessment::new("study-a", ts, answers, "").unwrap()
    }

    #[test]
    fn extremes_score_zero_and_one() {
        let top = score_axes(&assessment("2024-01-01T00:00:00Z", all_scored(3)));
        assert_eq!(top.fitting, 1.0);
        assert_eq!(top.inference, 1.0);
        let bottom = score_axes(&assessment("2024-01-01T00:00:00Z", all_scored(0)));
        assert_eq!(bottom.fitting, 0.0);
        assert_eq!(bottom.inference, 0.0);
    }

    #[test]
    fn partial_fitting_hand_case() {
        // eight 3s and nine 0s on the fitting axis: 24 / 51
        let mut answers = BTreeMap::new();
        for n in 1..=8 {
            answers.insert(
                QuestionKey {
                    axis: Axis::Fitting,
                    number: n,
                },
                Answer::Scored(3),
            );
        }
        let pos = score_axes(&assessment("2024-01-01T00:00:00Z", answers));
        assert!((pos.fitting - 24.0 / 51.0).abs() < 1e-12);
        assert_eq!(pos.inference, 0.0);
        // the eight 3s are all DS questions
        assert_eq!(pos.fitting_categories.dataset, 1.0);
        assert_eq!(pos.fitting_categories.metrics, 0.0);
        assert_eq!(pos.fitting_categories.model, 0.0);
    }

    #[test]
    fn na_and_unanswered_score_zero_but_stay_distinct() {
        let mut answers = all_scored(3);
        answers.insert(
            QuestionKey {
                axis: Axis::Fitting,
                number: 1,
            },
            Answer::NotApplicable,
        );
        answers.remove(&QuestionKey {
            axis: Axis::Fitting,
            number: 2,
        });
        let a = assessment("2024-01-01T00:00:00Z", answers);
        assert_eq!(
            a.answers[&QuestionKey {
                axis: Axis::Fitting,
                number: 2
            }],
            Answer::Unanswered
        );
        let pos = score_axes(&a);
        assert!((pos.fitting - 45.0 / 51.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_is_rejected_with_valid_keys() {
        let mut answers = BTreeMap::new();
        answers.insert(
            QuestionKey {
                axis: Axis::Fitting,
                number: 99,
            },
            Answer::Scored(1),
        );
        let err = Assessment::new("s", "2024-01-01T00:00:00Z", answers, "").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("fitting.99"));
        assert!(msg.contains("valid keys"));
        assert!(msg.contains("inference.14"));
    }

    #[test]
    fn region_classification_examples() {
        let pos = |f: f64, i: f64| AxisPosition {
            fitting: f,
            inference: i,
            fitting_categories: CategoryScores {
                dataset: 0.0,
                metrics: 0.0,
                model: 0.0,
            },
            inference_categories: CategoryScores {
                dataset: 0.0,
                metrics: 0.0,
                model: 0.0,
            },
        };
        assert_eq!(
            classify_region(&pos(0.05, 0.05), 0.5).kind,
            RegionKind::NotStarted
        );
        assert_eq!(
            classify_region(&pos(0.9, 0.2), 0.5).kind,
            RegionKind::FittingOnly
        );
        assert_eq!(
            classify_region(&pos(0.9, 0.9), 0.5).kind,
            RegionKind::SuccessfulReproduction
        );
        assert_eq!(
            classify_region(&pos(0.2, 0.9), 0.5).kind,
            RegionKind::InferenceOnly
        );
    }

    #[test]
    fn trajectory_appends_in_time_order_only() {
        let t = Trajectory::new("study-a");
        let a1 = assessment("2024-01-01T00:00:00Z", all_scored(0));
        let t = append_assessment(&t, &a1, 0.5).unwrap();
        assert_eq!(t.entries.len(), 1);
        // duplicate timestamp is rejected
        let dup = assessment("2024-01-01T00:00:00Z", all_scored(1));
        assert!(matches!(
            append_assessment(&t, &dup, 0.5),
            Err(Error::TimestampOrder(_))
        ));
        let a2 = assessment("2024-02-01T00:00:00Z", all_scored(2));
        let t = append_assessment(&t, &a2, 0.5).unwrap();
        assert_eq!(t.entries.len(), 2);
        assert_eq!(t.entries[1].region.kind, RegionKind::SuccessfulReproduction);
    }

    #[test]
    fn rising_scores_walk_through_regions() {
        let t = Trajectory::new("s");
        let mut low = all_scored(0);
        for n in 1..=17 {
            low.insert(
                QuestionKey {
                    axis: Axis::Fitting,
                    number: n,
                },
                Answer::Scored(0),
            );
        }
        let t = append_assessment(
            &t,
            &assessment("2024-01-01T00:00:00Z", low),
            0.5,
        )
        .unwrap();
        let mut mid = all_scored(0);
        for n in 1..=17 {
            mid.insert(
                QuestionKey {
                    axis: Axis::Fitting,
                    number: n,
                },
                Answer::Scored(3),
            );
        }
        let t = append_assessment(&t, &assessment("2024-02-01T00:00:00Z", mid), 0.5).unwrap();
        let t = append_assessment(
            &t,
            &assessment("2024-03-01T00:00:00Z", all_scored(3)),
            0.5,
        )
        .unwrap();
        let kinds: Vec<RegionKind> = t.entries.iter().map(|e| e.region.kind).collect();
        assert_eq!(
            kinds,
            vec![
                RegionKind::NotStarted,
                RegionKind::FittingOnly,
                RegionKind::SuccessfulReproduction
            ]
        );
    }

    #[test]
    fn assessment_json_round_trip() {
        let mut answers = all_scored(2);
        answers.insert(
            QuestionKey {
                axis: Axis::Inference,
                number: 3,
            },
            Answer::NotApplicable,
        );
        let a = Assessment::new("study-b", "2024-06-01T09:30:00+02:00", answers, "notes here")
            .unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let back: Assessment = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn trajectory_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = Trajectory::new("roundtrip");
        let a = assessment("2024-01-01T00:00:00Z", all_scored(1));
        let a = Assessment {
            study_id: "roundtrip".into(),
            ..a
        };
        let t = append_assessment(&t, &a, 0.5).unwrap();
        save_trajectory(dir.path(), &t).unwrap();
        let loaded = load_trajectory(dir.path(), "roundtrip").unwrap();
        assert_eq!(t, loaded);
        // absent study loads empty
        let empty = load_trajectory(dir.path(), "absent").unwrap();
        assert!(empty.entries.is_empty());
    }

    #[test]
    fn study_id_validation() {
        assert!(validate_study_id("ok-id_1.2").is_ok());
        assert!(validate_study_id("").is_err());
        assert!(validate_study_id(".hidden").is_err());
        assert!(validate_study_id("a/b").is_err());
    }

    #[test]
    fn diagram_is_deterministic_and_marks_corners() {
        let dir = tempfile::tempdir().unwrap();
        let t = Trajectory::new("diag");
        let t = append_assessment(
            &t,
            &Assessment::new("diag", "2024-01-01T00:00:00Z", all_scored(3), "").unwrap(),
            0.5,
        )
        .unwrap();
        let p1 = dir.path().join("a.svg");
        let p2 = dir.path().join("b.svg");
        let s1 = render_diagram(&t, &p1).unwrap();
        let s2 = render_diagram(&t, &p2).unwrap();
        assert_eq!(s1, s2, "identical input must render identical bytes");
        // the (1,1) marker sits at the top-right corner of the plot area
        assert!(s1.contains("cx=\"480.0\" cy=\"30.0\""), "corner marker missing");
        roxmltree::Document::parse(&s1).expect("diagram must be well-formed XML");
    }
}
