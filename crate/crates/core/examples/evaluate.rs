//! Confusion-matrix metrics and one-vs-rest ROC analysis for a small score
//! matrix.

use std::collections::BTreeMap;

use fundus_sve::classify::{ScoreMatrix, ScoreRow};
use fundus_sve::evaluate::evaluate_scores;
use fundus_sve::{Label, NUM_CLASSES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = [
        (0, [0.7, 0.2, 0.1]),
        (0, [0.5, 0.4, 0.1]),
        (0, [0.3, 0.6, 0.1]),
        (1, [0.2, 0.7, 0.1]),
        (1, [0.1, 0.8, 0.1]),
        (2, [0.2, 0.2, 0.6]),
        (2, [0.4, 0.1, 0.5]),
        (2, [0.5, 0.1, 0.4]),
    ];
    let rows = raw
        .iter()
        .enumerate()
        .map(|(i, (label, s))| {
            let mut scores = [0.0; NUM_CLASSES];
            scores[..3].copy_from_slice(s);
            ScoreRow {
                id: format!("s{i}"),
                label: Label::from_index(*label),
                scores,
            }
        })
        .collect();
    let (report, curves) = evaluate_scores(&ScoreMatrix::new(rows)?, None, BTreeMap::new())?;
    println!("confusion (rows = truth):");
    for row in &report.confusion {
        println!("  {row:?}");
    }
    for c in &report.per_class {
        println!(
            "class {}: precision {:.3} recall {:.3} specificity {:.3} f1 {:.3}",
            c.label, c.precision, c.recall, c.specificity, c.f1
        );
    }
    println!("overall accuracy {:.3}", report.overall_accuracy);
    if let Some(auc) = &report.auc {
        println!("macro AUC {:.4}, weighted AUC {:.4}", auc.macro_auc, auc.weighted_auc);
    }
    for c in &curves {
        println!("class {} ROC has {} points, AUC {:.4}", c.positive, c.points.len(), c.auc);
    }
    Ok(())
}
