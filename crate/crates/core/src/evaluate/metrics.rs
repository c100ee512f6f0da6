use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::label::Label;

/// `counts[i][j]` = samples of true class `labels[i]` predicted as `labels[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<Label>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    /// Validates shape; `labels` must be strictly increasing.
    pub fn from_counts(labels: Vec<Label>, counts: Vec<Vec<u64>>) -> Result<Self, EvalError> {
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvalError::Inconsistent("confusion labels must be strictly increasing".into()));
        }
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(EvalError::Inconsistent(format!(
                "confusion counts are not {0}x{0}",
                labels.len()
            )));
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    pub fn class_count(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    /// One-vs-rest counts for class index `c`.
    pub fn one_vs_rest(&self, c: usize) -> BinaryCounts {
        let tp = self.counts[c][c];
        let support: u64 = self.counts[c].iter().sum();
        let predicted: u64 = self.counts.iter().map(|r| r[c]).sum();
        let fn_ = support - tp;
        let fp = predicted - tp;
        BinaryCounts {
            tp,
            fp,
            fn_,
            tn: self.total() - tp - fp - fn_,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("truth");
        for l in &self.labels {
            out.push_str(&format!(",pred_{l}"));
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(&l.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

/// Confusion matrix over labels `0..class_count`.
pub fn confusion(truth: &[Label], predicted: &[Label], class_count: usize) -> Result<ConfusionMatrix, EvalError> {
    if class_count == 0 || class_count > crate::NUM_CLASSES {
        return Err(EvalError::Inconsistent(format!("class count {class_count}")));
    }
    let labels = (0..class_count).map(Label::from_index).collect::<Vec<_>>();
    confusion_over(truth, predicted, &labels)
}

/// Confusion matrix over an explicit, strictly increasing label list.
pub fn confusion_over(truth: &[Label], predicted: &[Label], labels: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    let mut cm = ConfusionMatrix::from_counts(labels.to_vec(), vec![vec![0; labels.len()]; labels.len()])?;
    let position = |l: &Label| labels.binary_search(l).map_err(|_| EvalError::LabelOutOfRange(*l));
    for (t, p) in truth.iter().zip(predicted) {
        cm.counts[position(t)?][position(p)?] += 1;
    }
    Ok(cm)
}

/// Which metrics of a class hit a 0/0 case and were reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Degeneracy {
    pub precision: bool,
    pub recall: bool,
    pub specificity: bool,
    pub f1: bool,
    pub accuracy: bool,
}

impl Degeneracy {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.specificity || self.f1 || self.accuracy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerClass {
    pub label: Label,
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub support: u64,
    pub counts: BinaryCounts,
    pub degenerate: Degeneracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub per_class: Vec<PerClass>,
    /// Support-weighted means.
    pub weighted_avg: Averages,
    /// Unweighted means over all classes of the matrix.
    pub macro_avg: Averages,
    pub overall_accuracy: f64,
}

fn ratio(num: u64, den: u64, flag: &mut bool) -> f64 {
    if den == 0 {
        *flag = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class one-vs-rest metrics plus weighted and macro averages.
pub fn class_metrics(cm: &ConfusionMatrix) -> ClassMetrics {
    let total = cm.total();
    let per_class: Vec<PerClass> = cm
        .labels
        .iter()
        .enumerate()
        .map(|(c, label)| {
            let k = cm.one_vs_rest(c);
            let mut d = Degeneracy::default();
            let precision = ratio(k.tp, k.tp + k.fp, &mut d.precision);
            let recall = ratio(k.tp, k.tp + k.fn_, &mut d.recall);
            let specificity = ratio(k.tn, k.tn + k.fp, &mut d.specificity);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                d.f1 = true;
                0.0
            };
            let accuracy = ratio(k.tp + k.tn, total, &mut d.accuracy);
            PerClass {
                label: *label,
                name: label.name().to_string(),
                precision,
                recall,
                specificity,
                f1,
                accuracy,
                support: k.tp + k.fn_,
                counts: k,
                degenerate: d,
            }
        })
        .collect();
    let average = |weight: &dyn Fn(&PerClass) -> f64| {
        let mut a = Averages::default();
        for p in &per_class {
            let w = weight(p);
            a.precision += w * p.precision;
            a.recall += w * p.recall;
            a.specificity += w * p.specificity;
            a.f1 += w * p.f1;
            a.accuracy += w * p.accuracy;
        }
        a
    };
    let weighted_avg = if total == 0 {
        Averages::default()
    } else {
        average(&|p| p.support as f64 / total as f64)
    };
    let macro_avg = if per_class.is_empty() {
        Averages::default()
    } else {
        let n = per_class.len() as f64;
        average(&|_| 1.0 / n)
    };
    let mut flag = false;
    ClassMetrics {
        overall_accuracy: ratio(cm.trace(), total, &mut flag),
        per_class,
        weighted_avg,
        macro_avg,
    }
}
