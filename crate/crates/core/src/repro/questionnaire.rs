//! The built-in equivalence questionnaire: 17 fitting-axis questions
//! and 14 inference-axis questions, each answered on a 0-3 scale and
//! tagged Dataset (DS), Metrics (S), or Model (M).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which axis a question scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Fitting,
    Inference,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Fitting => f.write_str("fitting"),
            Axis::Inference => f.write_str("inference"),
        }
    }
}

/// Question category: dataset, metrics, or model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "DS")]
    Dataset,
    #[serde(rename = "S")]
    Metrics,
    #[serde(rename = "M")]
    Model,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Dataset => f.write_str("DS"),
            Category::Metrics => f.write_str("S"),
            Category::Model => f.write_str("M"),
        }
    }
}

/// One questionnaire entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub axis: Axis,
    pub number: u32,
    pub category: Category,
    pub text: String,
}

impl Question {
    pub fn key(&self) -> QuestionKey {
        QuestionKey {
            axis: self.axis,
            number: self.number,
        }
    }
}

/// Identifies a question as `<axis>.<number>`, e.g. `fitting.4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuestionKey {
    pub axis: Axis,
    pub number: u32,
}

impl fmt::Display for QuestionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.axis, self.number)
    }
}

impl FromStr for QuestionKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (axis, number) = s
            .split_once('.')
            .ok_or_else(|| Error::Validation(format!("question key '{s}' is not <axis>.<n>")))?;
        let axis = match axis {
            "fitting" => Axis::Fitting,
            "inference" => Axis::Inference,
            _ => {
                return Err(Error::Validation(format!(
                    "unknown axis '{axis}' in question key '{s}'"
                )))
            }
        };
        let number: u32 = number
            .parse()
            .map_err(|_| Error::Validation(format!("bad question number in key '{s}'")))?;
        Ok(QuestionKey { axis, number })
    }
}

impl Serialize for QuestionKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuestionKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

const FITTING: [(u32, Category, &str); 17] = [
    (1, Category::Dataset, "Is the computational processing of the fitting dataset equivalent?"),
    (2, Category::Dataset, "Are the predictors selected for model fitting equivalent?"),
    (3, Category::Dataset, "Is the method used to select the predictors used for fitting equivalent?"),
    (4, Category::Dataset, "Is the definition of the target event equivalent?"),
    (5, Category::Dataset, "Are the preprocessing steps applied to the predictors before fitting equivalent?"),
    (6, Category::Dataset, "Are the preprocessing steps applied to the target variable(s) before fitting equivalent?"),
    (7, Category::Dataset, "Is the dataset size used for model fitting equivalent?"),
    (8, Category::Dataset, "Is the method for partitioning the dataset into folds for use in fitting equivalent?"),
    (9, Category::Metrics, "Is the way the fitting metrics are calculated and/or implemented equivalent?"),
    (10, Category::Metrics, "Is the set of metrics chosen for use in model fitting equivalent?"),
    (11, Category::Metrics, "Is the use of the chosen metrics within fitting optimization equivalent?"),
    (12, Category::Metrics, "Are the observed values of the metrics chosen for fitting equivalent?"),
    (13, Category::Model, "Is the computational implementation of the algorithm equivalent?"),
    (14, Category::Model, "Is the range of hyperparameters explored equivalent?"),
    (15, Category::Model, "Is the strategy used to search the hyperparameter space equivalent?"),
    (16, Category::Model, "Are the best hyperparameters discovered during the search equivalent?"),
    (17, Category::Model, "Are the learnable parameters observed after fitting equivalent?"),
];

const INFERENCE: [(u32, Category, &str); 14] = [
    (1, Category::Dataset, "Is the computational processing of the evaluation dataset equivalent?"),
    (2, Category::Dataset, "Are the predictors used with the model equivalent?"),
    (3, Category::Dataset, "Is the definition of the target event equivalent?"),
    (4, Category::Dataset, "Are the preprocessing steps applied to the predictors before evaluation equivalent?"),
    (5, Category::Dataset, "Are the preprocessing steps applied to the target variable(s) before evaluation equivalent?"),
    (6, Category::Dataset, "Do the model fitting and model evaluation datasets contain equivalent information?"),
    (7, Category::Dataset, "Is the dataset size used for model evaluation equivalent?"),
    (8, Category::Dataset, "Is the method for partitioning the dataset into folds for evaluation equivalent?"),
    (9, Category::Metrics, "Is the way the evaluation metrics are calculated and/or implemented equivalent?"),
    (10, Category::Metrics, "Is the set of metrics chosen for model evaluation equivalent?"),
    (11, Category::Metrics, "Are the observed values of the metrics chosen for fitting equivalent?"),
    (12, Category::Model, "Is the computational implementation of the algorithm equivalent?"),
    (13, Category::Model, "Are the structural hyperparameters of the model equivalent?"),
    (14, Category::Model, "Are the learned parameters in the model equivalent?"),
];

/// The 31 built-in questions: 17 on the fitting axis, then 14 on the
/// inference axis, in numbered order.
pub fn builtin_questionnaire() -> Vec<Question> {
    let fitting = FITTING.iter().map(|&(number, category, text)| Question {
        axis: Axis::Fitting,
        number,
        category,
        text: text.to_string(),
    });
    let inference = INFERENCE.iter().map(|&(number, category, text)| Question {
        axis: Axis::Inference,
        number,
        category,
        text: text.to_string(),
    });
    fitting.chain(inference).collect()
}
