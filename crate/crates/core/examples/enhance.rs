//! Applies every vessel-highlighting strategy to one synthetic image and
//! writes the results as PNG files.
//!
//! ```text
//! cargo run --example enhance -- [out-dir]
//! ```

use std::path::PathBuf;

use fundus_sve::enhance::{sve_apply, SveStrategy, SveVariant, DEFAULT_GAMMA, DEFAULT_WEIGHT};
use fundus_sve::imaging::{save_mask, save_raster};
use fundus_sve::synthetic::generate_sample;
use fundus_sve::Label;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "enhance_demo".into()));
    std::fs::create_dir_all(&out)?;
    let (img, mask) = generate_sample(Label::from_index(1), 128, 6.0, 11)?;
    save_raster(&img, out.join("original.png"))?;
    save_mask(&mask, out.join("mask.png"))?;
    println!("{} of {} pixels are vessel", mask.vessel_count(), img.pixel_count());
    for variant in SveVariant::ALL {
        let strategy = SveStrategy::new(variant, DEFAULT_WEIGHT, DEFAULT_GAMMA)?;
        let enhanced = sve_apply(&img, &mask, &strategy)?;
        let path = out.join(format!("{}.png", variant.name()));
        save_raster(&enhanced, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}
