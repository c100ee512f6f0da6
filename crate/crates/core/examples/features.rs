//! Extracts LBP and HOG descriptors from synthetic images of each pattern
//! family and prints a few histogram values.

use fundus_sve::features::{extract_image, Descriptor, HogParams, LbpParams, DEFAULT_RESIZE};
use fundus_sve::synthetic::generate_sample;
use fundus_sve::Label;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let size = Some((DEFAULT_RESIZE, DEFAULT_RESIZE));
    let lbp = Descriptor::Lbp(LbpParams::default());
    let hog = Descriptor::Hog(HogParams::default());
    println!("{}: {} values", lbp.id(), lbp.dimension(DEFAULT_RESIZE, DEFAULT_RESIZE)?);
    println!("{}: {} values", hog.id(), hog.dimension(DEFAULT_RESIZE, DEFAULT_RESIZE)?);
    for family in 0..3 {
        let (img, _) = generate_sample(Label::from_index(family), 64, 6.0, 3)?;
        let v = extract_image(&img, &lbp, size)?;
        let top: Vec<String> = v.values.iter().take(6).map(|x| format!("{x:.4}")).collect();
        let h = extract_image(&img, &hog, size)?;
        let peak = h.values.iter().cloned().fold(0.0_f64, f64::max);
        let active = h.values.iter().filter(|x| **x > 1e-3).count();
        println!(
            "family {family}: lbp[0..6] = [{}], hog peak {peak:.3} with {active} active bins",
            top.join(", ")
        );
    }
    Ok(())
}
