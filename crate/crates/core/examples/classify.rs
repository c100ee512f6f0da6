//! Trains each classifier on two-dimensional Gaussian blobs, reports
//! training accuracy and checks that a saved model reloads to the same scores.

use fundus_sve::classify::{
    fit, load_model, predict, predict_scores, save_model, ClassifierKind, ClassifierSpec,
};
use fundus_sve::features::{FeatureRow, FeatureTable};
use fundus_sve::seed;
use fundus_sve::Label;
use rand_distr::{Distribution, Normal};

fn blobs(per_class: usize, seed_value: u64) -> FeatureTable {
    let mut rng = seed::rng(seed_value);
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let centres = [(-3.0, 0.0), (3.0, 0.0), (0.0, 4.0)];
    let mut rows = Vec::new();
    for (c, (cx, cy)) in centres.iter().enumerate() {
        for i in 0..per_class {
            rows.push(FeatureRow {
                id: format!("c{c}_{i}"),
                label: Label::from_index(c),
                values: vec![cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)],
            });
        }
    }
    FeatureTable::new("blobs", 2, rows).expect("consistent rows")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let train = blobs(50, 1);
    let test = blobs(30, 2);
    let dir = tempfile::tempdir()?;
    for kind in ClassifierKind::ALL {
        let model = fit(&ClassifierSpec::new(kind), &train)?;
        let pred = predict(&model, &test)?;
        let correct = pred.labels.iter().zip(&test.rows).filter(|(p, r)| **p == r.label).count();
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&model, &path)?;
        let same = predict_scores(&load_model(&path)?, &test)? == pred.scores;
        println!(
            "{kind:>6}: test accuracy {:.3}, epochs {}, reload identical: {same}",
            correct as f64 / test.rows.len() as f64,
            model.training.epochs_run
        );
    }
    Ok(())
}
