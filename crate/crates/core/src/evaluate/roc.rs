use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::classify::ScoreMatrix;
use crate::label::Label;

/// One-vs-rest ROC curve of a single class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub positive: Label,
    /// `(fpr, tpr)`: the origin, one point per distinct score (predicting
    /// positive when `score >= threshold`, thresholds descending), then `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    /// Distinct scores, descending; `points[i + 1]` belongs to `thresholds[i]`.
    pub thresholds: Vec<f64>,
    pub auc: f64,
    pub positives: u64,
    pub negatives: u64,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (f, t) in &self.points {
            out.push_str(&format!("{f},{t}\n"));
        }
        out
    }
}

/// ROC curve and trapezoidal AUC for `scores` against binary `truth`.
///
/// Tied scores move TPR and FPR together. The area is accumulated in integer
/// units of `1 / (2 P N)`, so it equals the pairwise probability
/// `P(s+ > s-) + P(s+ = s-) / 2` exactly before the final division.
pub fn roc_curve(scores: &[f64], truth: &[bool], positive: Label) -> Result<RocCurve, EvalError> {
    if scores.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: scores.len(),
        });
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(EvalError::Inconsistent(format!("non-finite score {s}")));
    }
    let p = truth.iter().filter(|t| **t).count() as u64;
    let n = truth.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(EvalError::UndefinedAuc {
            label: positive,
            positives: p,
            negatives: n,
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*b].total_cmp(&scores[*a]));
    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut twice_area: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        twice_area += u128::from(fp - fp0) * u128::from(tp + tp0);
        thresholds.push(s);
        points.push((fp as f64 / n as f64, tp as f64 / p as f64));
    }
    points.push((1.0, 1.0));
    Ok(RocCurve {
        positive,
        points,
        thresholds,
        auc: twice_area as f64 / (2 * u128::from(p) * u128::from(n)) as f64,
        positives: p,
        negatives: n,
    })
}

/// Brute-force `P(s+ > s-) + P(s+ = s-) / 2` over all positive/negative pairs.
pub fn pairwise_auc(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let pos: Vec<f64> = scores.iter().zip(truth).filter(|(_, t)| **t).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(truth).filter(|(_, t)| !**t).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut twice: u128 = 0;
    for a in &pos {
        for b in &neg {
            twice += match a.partial_cmp(b) {
                Some(std::cmp::Ordering::Greater) => 2,
                Some(std::cmp::Ordering::Equal) => 1,
                _ => 0,
            };
        }
    }
    Some(twice as f64 / (2 * pos.len() as u128 * neg.len() as u128) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassAuc {
    /// One entry per label `0..14`; `None` where the class is absent from the truth.
    pub per_class: BTreeMap<Label, Option<f64>>,
    /// Mean over defined per-class AUCs.
    #[serde(rename = "macro")]
    pub macro_auc: f64,
    /// Support-weighted mean over defined per-class AUCs.
    #[serde(rename = "weighted")]
    pub weighted_auc: f64,
    #[serde(skip)]
    pub curves: Vec<RocCurve>,
}

/// One-vs-rest AUC for every class present in the truth of `scores`.
pub fn multiclass_auc(scores: &ScoreMatrix) -> Result<MulticlassAuc, EvalError> {
    let truth = scores.truth();
    let mut present: Vec<Label> = truth.clone();
    present.sort();
    present.dedup();
    if present.len() < 2 {
        return Err(EvalError::TooFewClasses(present.len()));
    }
    let curves: Vec<RocCurve> = present
        .par_iter()
        .map(|c| {
            let t: Vec<bool> = truth.iter().map(|l| l == c).collect();
            roc_curve(&scores.column(*c), &t, *c)
        })
        .collect::<Result<_, _>>()?;
    let mut per_class: BTreeMap<Label, Option<f64>> = Label::all().map(|l| (l, None)).collect();
    let total: u64 = curves.iter().map(|c| c.positives).sum();
    let mut macro_auc = 0.0;
    let mut weighted_auc = 0.0;
    for c in &curves {
        per_class.insert(c.positive, Some(c.auc));
        macro_auc += c.auc;
        weighted_auc += c.auc * c.positives as f64 / total as f64;
    }
    Ok(MulticlassAuc {
        per_class,
        macro_auc: macro_auc / curves.len() as f64,
        weighted_auc,
        curves,
    })
}
