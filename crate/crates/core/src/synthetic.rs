//! Seeded synthetic fundus-like images with vessel masks.
//!
//! Each image is a reddish disc with a soft vignette, darker "vessel" strokes
//! and per-channel Gaussian noise. The stroke pattern depends on the pattern
//! family of the label (`label % 3`):
//!
//! | family | strokes |
//! |--------|---------|
//! | 0 | three wide straight bands at random orientations |
//! | 1 | five thin rings of random radius |
//! | 2 | 36 scattered small dots |
//!
//! The generator backs the examples and the end-to-end tests; it is not a
//! model of real retinal pathology.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::dataset::{save_manifest, DatasetError, Manifest, SampleRecord};
use crate::imaging::{round_u8, save_mask, save_raster, ImageIoError, RasterImage, VesselMask};
use crate::label::Label;
use crate::seed;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image size must be at least 16, got {0}")]
    TooSmall(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Square image side in pixels.
    pub size: usize,
    /// Samples to generate per label.
    pub counts: Vec<(Label, usize)>,
    /// Standard deviation of the additive per-channel noise.
    pub noise_std: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Three labels (0, 1, 2) with the given counts on 64x64 images.
    pub fn three_class(counts: [usize; 3], seed: u64) -> Self {
        SyntheticSpec {
            size: 64,
            counts: counts
                .iter()
                .enumerate()
                .map(|(i, n)| (Label::from_index(i), *n))
                .collect(),
            noise_std: 6.0,
            seed,
        }
    }
}

struct Canvas {
    size: usize,
    vessel: Vec<bool>,
}

impl Canvas {
    fn paint(&mut self, inside: impl Fn(f64, f64) -> bool) {
        for y in 0..self.size {
            for x in 0..self.size {
                if inside(x as f64 + 0.5, y as f64 + 0.5) {
                    self.vessel[y * self.size + x] = true;
                }
            }
        }
    }
}

fn segment_distance(px: f64, py: f64, (ax, ay): (f64, f64), (bx, by): (f64, f64)) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    ((px - ax - t * dx).powi(2) + (py - ay - t * dy).powi(2)).sqrt()
}

fn draw_pattern(canvas: &mut Canvas, family: usize, rng: &mut ChaCha8Rng) {
    let s = canvas.size as f64;
    match family {
        0 => {
            for _ in 0..3 {
                let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
                let (cx, cy) = (rng.random_range(0.3 * s..0.7 * s), rng.random_range(0.3 * s..0.7 * s));
                let (dx, dy) = (angle.cos() * s, angle.sin() * s);
                let half_width = s / 11.0 * rng.random_range(0.9..1.1);
                let (a, b) = ((cx - dx, cy - dy), (cx + dx, cy + dy));
                canvas.paint(|x, y| segment_distance(x, y, a, b) <= half_width);
            }
        }
        1 => {
            for _ in 0..5 {
                let r = rng.random_range(0.08 * s..0.3 * s);
                let (cx, cy) = (rng.random_range(0.3 * s..0.7 * s), rng.random_range(0.3 * s..0.7 * s));
                let half_width = s / 64.0 * rng.random_range(0.6..0.9);
                canvas.paint(|x, y| (((x - cx).powi(2) + (y - cy).powi(2)).sqrt() - r).abs() <= half_width);
            }
        }
        _ => {
            for _ in 0..36 {
                let r = s / 64.0 * rng.random_range(1.0..1.6);
                let (cx, cy) = (rng.random_range(0.1 * s..0.9 * s), rng.random_range(0.1 * s..0.9 * s));
                canvas.paint(|x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r * r);
            }
        }
    }
}

/// One image and its vessel mask for `label`, fully determined by `seed`.
pub fn generate_sample(
    label: Label,
    size: usize,
    noise_std: f64,
    seed: u64,
) -> Result<(RasterImage, VesselMask), SyntheticError> {
    if size < 16 {
        return Err(SyntheticError::TooSmall(size));
    }
    let mut rng = seed::rng(seed);
    let mut canvas = Canvas {
        size,
        vessel: vec![false; size * size],
    };
    draw_pattern(&mut canvas, label.index() % 3, &mut rng);
    let background = [
        rng.random_range(170.0..200.0),
        rng.random_range(75.0..95.0),
        rng.random_range(35.0..50.0),
    ];
    let vessel_shade = rng.random_range(0.45..0.6);
    let noise = Normal::new(0.0, noise_std.max(0.0)).expect("finite std");
    let centre = size as f64 / 2.0;
    let image = RasterImage::from_fn(size, size, |x, y| {
        let r = ((x as f64 + 0.5 - centre).powi(2) + (y as f64 + 0.5 - centre).powi(2)).sqrt() / centre;
        let vignette = 1.0 - 0.35 * r.min(1.2).powi(2);
        let shade = if canvas.vessel[y * size + x] { vessel_shade } else { 1.0 };
        background.map(|c| round_u8(c * vignette * shade + noise.sample(&mut rng)))
    })
    .expect("non-empty size");
    let mask = VesselMask::from_fn(size, size, |x, y| canvas.vessel[y * size + x]).expect("non-empty size");
    Ok((image, mask))
}

/// Writes `images/<id>.png`, `masks/<id>.png` and `manifest.csv` under `dir`
/// and returns the manifest (paths relative to `dir`). Ids are
/// `syn_<label>_<nnn>`.
pub fn generate_dataset(dir: &Path, spec: &SyntheticSpec) -> Result<Manifest, SyntheticError> {
    for sub in ["images", "masks"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|source| SyntheticError::Io { path: p, source })?;
    }
    let mut manifest = Manifest::new("synthetic", dir);
    for (label, count) in &spec.counts {
        for i in 0..*count {
            let id = format!("syn_{}_{i:03}", label.index());
            let (img, mask) = generate_sample(*label, spec.size, spec.noise_std, seed::mix(spec.seed, &id))?;
            let image_rel = PathBuf::from("images").join(format!("{id}.png"));
            let mask_rel = PathBuf::from("masks").join(format!("{id}.png"));
            save_raster(&img, dir.join(&image_rel))?;
            save_mask(&mask, dir.join(&mask_rel))?;
            manifest
                .records
                .push(SampleRecord::original(id, image_rel, Some(mask_rel), *label));
        }
    }
    save_manifest(&manifest, dir.join("manifest.csv"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::load_manifest;

    #[test]
    fn deterministic_and_distinct() {
        let l = Label::from_index(1);
        let a = generate_sample(l, 32, 5.0, 9).unwrap();
        let b = generate_sample(l, 32, 5.0, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_sample(l, 32, 5.0, 10).unwrap();
        assert_ne!(a.0, c.0);
        for family in 0..3 {
            let (_, mask) = generate_sample(Label::from_index(family), 64, 0.0, 3).unwrap();
            assert!(mask.vessel_count() > 20, "family {family}");
            assert!(mask.vessel_count() < 64 * 64 * 3 / 4, "family {family}");
        }
        assert!(generate_sample(l, 8, 0.0, 1).is_err());
    }

    #[test]
    fn dataset_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_dataset(dir.path(), &SyntheticSpec::three_class([2, 1, 3], 4)).unwrap();
        assert_eq!(m.records.len(), 6);
        let loaded = load_manifest(dir.path().join("manifest.csv"), true).unwrap();
        assert_eq!(loaded.records, m.records);
    }
}
