//! Confusion matrices and scalar classification metrics.
//!
//! Rows of a [`ConfusionMatrix`] are the true class, columns the predicted
//! class. Zero denominators (a never-predicted class, a single-class matrix
//! for MCC) resolve to 0 instead of erroring so weak classifiers can still
//! be scored in batch.

mod auc;
mod confusion;
mod io;

pub use auc::{auc_binary, auc_ovr_macro, auc_ovr_per_class};
pub use confusion::{
    accuracy, balanced_accuracy, confusion_from_indices, confusion_from_records, macro_f1, mcc_multiclass,
    per_class_scores, ClassScores, ConfusionMatrix,
};
pub use io::{parse_predictions, read_predictions, report_to_json, write_predictions, write_report};

use thiserror::Error;

use crate::image_io::ClassLabel;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no prediction records")]
    EmptyInput,
    #[error("confusion matrix has no counts")]
    EmptyMatrix,
    #[error("class `{0}` has no true examples")]
    EmptyClass(String),
    #[error("label {label} out of range for {k} classes")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("invalid confusion matrix: {0}")]
    InvalidMatrix(String),
    #[error("class `{0}` needs at least one positive and one negative example for AUC")]
    DegenerateClass(String),
    #[error("record `{0}` has no scores")]
    MissingScores(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}, record `{id}`: {message}")]
    Validation { id: String, line: u64, message: String },
    #[error("i/o: {0}")]
    Io(String),
}

/// Index of the largest score, lowest index on ties.
pub fn argmax4(scores: &[f64; 4]) -> usize {
    let mut best = 0;
    for i in 1..4 {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

/// One classified item.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRecord {
    pub id: String,
    pub truth: ClassLabel,
    pub predicted: ClassLabel,
    pub scores: Option<[f64; 4]>,
}

impl PredictionRecord {
    /// Scores must be finite and their argmax must equal `predicted`.
    pub fn validate(&self) -> Result<(), MetricsError> {
        let Some(scores) = &self.scores else {
            return Ok(());
        };
        let invalid = |message: String| MetricsError::Validation {
            id: self.id.clone(),
            line: 0,
            message,
        };
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(invalid("scores must be finite".into()));
        }
        let top = argmax4(scores);
        if top != self.predicted.index() {
            return Err(invalid(format!(
                "pred_label {} disagrees with argmax of scores ({})",
                self.predicted.index(),
                top
            )));
        }
        Ok(())
    }
}

/// Every headline metric for one set of predictions.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub mcc: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassScores>,
    /// Present only when every record carries scores.
    pub auc_ovr_macro: Option<f64>,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub fn from_matrix(cm: ConfusionMatrix, auc: Option<f64>) -> Result<Self, MetricsError> {
        Ok(Self {
            accuracy: accuracy(&cm)?,
            balanced_accuracy: balanced_accuracy(&cm)?,
            mcc: mcc_multiclass(&cm)?,
            macro_f1: macro_f1(&cm)?,
            per_class: per_class_scores(&cm)?,
            auc_ovr_macro: auc,
            confusion: cm,
        })
    }

    pub fn from_records(records: &[PredictionRecord]) -> Result<Self, MetricsError> {
        let cm = confusion_from_records(records)?;
        let auc = if records.iter().all(|r| r.scores.is_some()) {
            Some(auc_ovr_macro(records)?)
        } else {
            None
        };
        Self::from_matrix(cm, auc)
    }
}
