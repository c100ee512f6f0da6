//! End-to-end run on a synthetic dataset: split, enhancement, augmentation,
//! LBP features, KNN and evaluation, each stage in its own directory.
//!
//! ```text
//! cargo run --release --example pipeline -- [out-dir]
//! ```

use std::path::PathBuf;

use fundus_sve::evaluate::load_report;
use fundus_sve::pipeline::{cmd_pipeline, PipelineOptions, RunConfig};
use fundus_sve::synthetic::{generate_dataset, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pipeline_demo".into()));
    let data = out.join("data");
    generate_dataset(&data, &SyntheticSpec::three_class([60, 45, 30], 21))?;
    let cfg = RunConfig {
        manifest: Some(data.join("manifest.csv")),
        out_dir: Some(out.join("run")),
        seed: 21,
        ..RunConfig::default()
    };
    let outcome = cmd_pipeline(&cfg, PipelineOptions::default())?;
    for stage in &outcome.stages {
        let state = if stage.skipped { "reused" } else { "ran" };
        println!("{:<9} {state:<7} {}", stage.stage, stage.log.display());
    }
    let report = load_report(outcome.report.expect("pipeline produces a report"))?;
    println!("test accuracy {:.4}", report.overall_accuracy);
    if let Some(auc) = report.auc {
        println!("weighted AUC {:.4}", auc.weighted_auc);
    }
    Ok(())
}
