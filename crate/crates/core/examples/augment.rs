//! Plans and executes class balancing for a small imbalanced dataset, then
//! shows the effect of Gaussian noise on a flat grey image.

use std::collections::BTreeSet;

use fundus_sve::augment::{add_gaussian_noise, build_balance_plan, eligible_members, execute_plan, PlanOptions};
use fundus_sve::dataset::{stratified_split, summarize_distribution, Split};
use fundus_sve::imaging::RasterImage;
use fundus_sve::synthetic::{generate_dataset, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let manifest = generate_dataset(dir.path(), &SyntheticSpec::three_class([20, 9, 4], 5))?;
    let manifest = stratified_split(&manifest, [0.6, 0.2, 0.2], 5)?;

    let splits: BTreeSet<Split> = [Split::Train].into();
    let members = eligible_members(&manifest, &splits);
    let plan = build_balance_plan(&members, &PlanOptions::new(20, 9))?;
    for sample in plan.samples().take(5) {
        let ops: Vec<String> = sample.ops.iter().map(ToString::to_string).collect();
        println!("{} <- {} via {}", sample.derived_id, sample.source, ops.join(" + "));
    }
    println!("... {} derived samples in total", plan.len());

    let balanced = execute_plan(&plan, &manifest, &dir.path().join("derived"), &splits)?;
    let dist = summarize_distribution(&balanced)?;
    for label in dist.labels() {
        println!("class {label}: {} training samples", dist.count(Split::Train, label));
    }

    let grey = RasterImage::filled(100, 100, [128, 128, 128])?;
    let noisy = add_gaussian_noise(&grey, 0.0, 10.0, 1)?;
    let values: Vec<f64> = noisy.as_raw().iter().map(|v| f64::from(*v)).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    println!("noise std 10 on mid grey: sample mean {mean:.3}, sample std {std:.3}");
    Ok(())
}
