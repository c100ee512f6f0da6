//! Confusion-matrix metrics, one-vs-rest ROC curves and AUC summaries.
//!
//! All metrics are one-vs-rest reductions of a confusion matrix. A 0/0 ratio
//! is reported as 0 and flagged in the per-class [`Degeneracy`] record.

mod metrics;
mod roc;

pub use metrics::{
    class_metrics, confusion, confusion_over, Averages, BinaryCounts, ClassMetrics, ConfusionMatrix, Degeneracy,
    PerClass,
};
pub use roc::{multiclass_auc, pairwise_auc, roc_curve, MulticlassAuc, RocCurve};

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{predict_labels, Decision, ScoreMatrix};
use crate::label::Label;

pub const REPORT_FILE: &str = "report.json";
pub const CONFUSION_FILE: &str = "confusion.csv";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {0} is outside the confusion matrix labels")]
    LabelOutOfRange(Label),
    #[error("AUC undefined for class {label}: {positives} positives, {negatives} negatives")]
    UndefinedAuc { label: Label, positives: u64, negatives: u64 },
    #[error("multiclass AUC needs at least 2 classes in the truth, found {0}")]
    TooFewClasses(usize),
    #[error("inconsistent evaluation inputs: {0}")]
    Inconsistent(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed report: {source}")]
    Malformed {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Where the hard predictions behind the confusion matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionSource {
    /// Row argmax of the score matrix.
    Argmax,
    /// The model's own decisions (`predictions.csv`).
    Model,
}

/// Machine-readable evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub labels: Vec<Label>,
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<PerClass>,
    pub weighted_avg: Averages,
    pub macro_avg: Averages,
    pub overall_accuracy: f64,
    /// Absent when fewer than two classes occur in the truth.
    pub auc: Option<MulticlassAuc>,
    pub decisions: DecisionSource,
    pub samples: u64,
    /// Free-form run metadata (model, seeds, input hashes).
    pub run: BTreeMap<String, String>,
}

impl EvaluationReport {
    pub fn confusion_matrix(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            labels: self.labels.clone(),
            counts: self.confusion.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite");
        s.push('\n');
        s
    }
}

/// Assembles a report, checking that the parts describe the same classes.
pub fn build_report(
    cm: &ConfusionMatrix,
    metrics: &ClassMetrics,
    auc: Option<&MulticlassAuc>,
    decisions: DecisionSource,
    run: BTreeMap<String, String>,
) -> Result<EvaluationReport, EvalError> {
    let metric_labels: Vec<Label> = metrics.per_class.iter().map(|p| p.label).collect();
    if metric_labels != cm.labels {
        return Err(EvalError::Inconsistent(format!(
            "metrics cover {} classes, confusion matrix {}",
            metric_labels.len(),
            cm.labels.len()
        )));
    }
    if let Some(a) = auc {
        if let Some(c) = a.curves.iter().find(|c| cm.labels.binary_search(&c.positive).is_err()) {
            return Err(EvalError::Inconsistent(format!(
                "ROC curve for class {} not in the confusion matrix",
                c.positive
            )));
        }
    }
    Ok(EvaluationReport {
        labels: cm.labels.clone(),
        confusion: cm.counts.clone(),
        per_class: metrics.per_class.clone(),
        weighted_avg: metrics.weighted_avg,
        macro_avg: metrics.macro_avg,
        overall_accuracy: metrics.overall_accuracy,
        auc: auc.map(|a| MulticlassAuc {
            curves: Vec::new(),
            ..a.clone()
        }),
        decisions,
        samples: cm.total(),
        run,
    })
}

/// Full evaluation of a score matrix.
///
/// Hard predictions come from `decisions` when given (matched by sample id),
/// otherwise from the row argmax. The confusion matrix covers every label
/// that occurs in the truth or the predictions.
pub fn evaluate_scores(
    scores: &ScoreMatrix,
    decisions: Option<&[Decision]>,
    run: BTreeMap<String, String>,
) -> Result<(EvaluationReport, Vec<RocCurve>), EvalError> {
    let truth = scores.truth();
    let (predicted, source) = match decisions {
        None => (predict_labels(scores), DecisionSource::Argmax),
        Some(d) => {
            if d.len() != scores.rows.len() {
                return Err(EvalError::LengthMismatch {
                    truth: scores.rows.len(),
                    predicted: d.len(),
                });
            }
            let by_id: HashMap<&str, &Decision> = d.iter().map(|x| (x.id.as_str(), x)).collect();
            let predicted = scores
                .rows
                .iter()
                .map(|r| match by_id.get(r.id.as_str()) {
                    Some(x) if x.label == r.label => Ok(x.pred),
                    Some(_) => Err(EvalError::Inconsistent(format!("sample {} has conflicting true labels", r.id))),
                    None => Err(EvalError::Inconsistent(format!("no prediction for sample {}", r.id))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            (predicted, DecisionSource::Model)
        }
    };
    let mut labels: Vec<Label> = truth.iter().chain(&predicted).copied().collect();
    labels.sort();
    labels.dedup();
    let cm = confusion_over(&truth, &predicted, &labels)?;
    let metrics = class_metrics(&cm);
    let auc = match multiclass_auc(scores) {
        Ok(a) => Some(a),
        Err(EvalError::TooFewClasses(_)) => None,
        Err(e) => return Err(e),
    };
    let curves = auc.as_ref().map(|a| a.curves.clone()).unwrap_or_default();
    Ok((build_report(&cm, &metrics, auc.as_ref(), source, run)?, curves))
}

pub fn roc_file_name(label: Label) -> String {
    format!("roc_class{label}.csv")
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, EvalError> {
    fs::write(&path, text).map_err(|source| EvalError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `report.json`, `confusion.csv` and one `roc_class{c}.csv` per curve
/// into `dir`; returns the written paths.
pub fn write_report(report: &EvaluationReport, curves: &[RocCurve], dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    fs::create_dir_all(dir).map_err(|source| EvalError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = vec![
        write(dir.join(REPORT_FILE), &report.to_json())?,
        write(dir.join(CONFUSION_FILE), &report.confusion_matrix().to_csv())?,
    ];
    for c in curves {
        written.push(write(dir.join(roc_file_name(c.positive)), &c.to_csv())?);
    }
    Ok(written)
}

pub fn load_report(path: impl AsRef<Path>) -> Result<EvaluationReport, EvalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| EvalError::Malformed {
        path: path.to_path_buf(),
        source,
    })
}
