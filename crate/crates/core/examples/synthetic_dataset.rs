//! Writes a seeded three-class synthetic dataset (images, masks, manifest).
//!
//! ```text
//! cargo run --example synthetic_dataset -- <out-dir> [per-class count] [seed]
//! ```

use std::path::PathBuf;

use fundus_sve::synthetic::{generate_dataset, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synthetic_data".into()));
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(40);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let manifest = generate_dataset(&dir, &SyntheticSpec::three_class([count; 3], seed))?;
    println!("{} samples written to {}", manifest.records.len(), dir.display());
    println!("{}", dir.join("manifest.csv").display());
    Ok(())
}
