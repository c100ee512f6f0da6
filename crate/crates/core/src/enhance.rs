//! Segmentation-based vascular enhancement (SVE).
//!
//! All intensity strategies convert to HSI, rewrite the I channel using the
//! binary vessel mask and recombine with the untouched H and S channels. The
//! weighted-background strategy is the reference method:
//!
//! ```text
//! I_background                 = I * (1 - mask)
//! I_enhanced                   = I + mask * 255 * weight
//! I_enhanced_normalized        = (I_enhanced - min) / (max - min) * 255
//! I_enhanced_normalized_vessel = I_enhanced_normalized * mask
//! I_new                        = I_background + I_enhanced_normalized_vessel
//! ```
//!
//! The min / max of the stretch are taken over the whole image. When the
//! enhanced channel is constant the stretch is undefined and every pixel of
//! `I_enhanced_normalized` is set to [`DEGENERATE_STRETCH_VALUE`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SampleRecord;
use crate::imaging::{
    ensure_same_dims, hsi_to_rgb, load_mask, load_raster, rgb_to_hsi, round_u8, save_raster,
    HsiImage, ImageError, ImageIoError, RasterImage, VesselMask,
};

pub const DEFAULT_WEIGHT: f64 = 0.2;
pub const DEFAULT_GAMMA: f64 = 0.5;
/// Value of the normalised channel when `max(I_enhanced) == min(I_enhanced)`.
pub const DEGENERATE_STRETCH_VALUE: f64 = 128.0;

#[derive(Debug, Error)]
pub enum SveError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("unknown SVE strategy {0:?} (expected vessel-only, weighted-origin, weighted-background, gamma-origin or heatmap-origin)")]
    UnknownStrategy(String),
    #[error("weight must be finite and >= 0, got {0}")]
    InvalidWeight(f64),
    #[error("gamma must be finite and > 0, got {0}")]
    InvalidGamma(f64),
    #[error("the heatmap strategy recolours in RGB and has no intensity-only form")]
    RgbOnlyStrategy,
}

/// Which vessel-highlighting variant to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SveVariant {
    /// Background set to black, vessels keep their intensity.
    VesselOnly,
    /// `I + mask * 255 * weight`, clamped.
    WeightedOrigin,
    /// The reference min-max stretched method.
    WeightedBackground,
    /// Vessel intensity replaced by `255 (I / 255)^gamma`.
    GammaOrigin,
    /// Vessel pixels recoloured through [`HEATMAP_LUT`].
    HeatmapOrigin,
}

impl SveVariant {
    pub const ALL: [SveVariant; 5] = [
        SveVariant::VesselOnly,
        SveVariant::WeightedOrigin,
        SveVariant::WeightedBackground,
        SveVariant::GammaOrigin,
        SveVariant::HeatmapOrigin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SveVariant::VesselOnly => "vessel-only",
            SveVariant::WeightedOrigin => "weighted-origin",
            SveVariant::WeightedBackground => "weighted-background",
            SveVariant::GammaOrigin => "gamma-origin",
            SveVariant::HeatmapOrigin => "heatmap-origin",
        }
    }

    /// Whether the `weight` parameter affects this variant.
    pub fn uses_weight(self) -> bool {
        matches!(self, SveVariant::WeightedOrigin | SveVariant::WeightedBackground)
    }

    pub fn uses_gamma(self) -> bool {
        self == SveVariant::GammaOrigin
    }
}

impl fmt::Display for SveVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SveVariant {
    type Err = SveError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SveVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| SveError::UnknownStrategy(s.to_string()))
    }
}

/// Variant plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SveStrategy {
    pub variant: SveVariant,
    pub weight: f64,
    pub gamma: f64,
}

impl SveStrategy {
    pub fn new(variant: SveVariant, weight: f64, gamma: f64) -> Result<Self, SveError> {
        let s = SveStrategy {
            variant,
            weight,
            gamma,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn weighted_background(weight: f64) -> Result<Self, SveError> {
        Self::new(SveVariant::WeightedBackground, weight, DEFAULT_GAMMA)
    }

    pub fn validate(&self) -> Result<(), SveError> {
        if !(self.weight.is_finite() && self.weight >= 0.0) {
            return Err(SveError::InvalidWeight(self.weight));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(SveError::InvalidGamma(self.gamma));
        }
        Ok(())
    }
}

impl Default for SveStrategy {
    fn default() -> Self {
        SveStrategy {
            variant: SveVariant::WeightedBackground,
            weight: DEFAULT_WEIGHT,
            gamma: DEFAULT_GAMMA,
        }
    }
}

/// Every intermediate matrix of the weighted-background method, row-major on
/// the 0-255 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SveIntermediates {
    pub i_background: Vec<f64>,
    pub i_enhanced: Vec<f64>,
    pub i_enhanced_normalized: Vec<f64>,
    pub i_enhanced_normalized_vessel: Vec<f64>,
    pub i_new: Vec<f64>,
}

/// Runs the weighted-background computation on an intensity channel.
pub fn weighted_background_intensity(intensity: &[f64], mask: &[u8], weight: f64) -> SveIntermediates {
    debug_assert_eq!(intensity.len(), mask.len());
    let m = |k: usize| f64::from(mask[k]);
    let n = intensity.len();
    let i_background: Vec<f64> = (0..n).map(|k| intensity[k] * (1.0 - m(k))).collect();
    let i_enhanced: Vec<f64> = (0..n)
        .map(|k| intensity[k] + m(k) * 255.0 * weight)
        .collect();
    let (lo, hi) = i_enhanced
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    let i_enhanced_normalized: Vec<f64> = if hi > lo {
        i_enhanced
            .iter()
            .map(|v| (v - lo) / (hi - lo) * 255.0)
            .collect()
    } else {
        vec![DEGENERATE_STRETCH_VALUE; n]
    };
    let i_enhanced_normalized_vessel: Vec<f64> =
        (0..n).map(|k| i_enhanced_normalized[k] * m(k)).collect();
    let i_new = (0..n)
        .map(|k| (i_background[k] + i_enhanced_normalized_vessel[k]).clamp(0.0, 255.0))
        .collect();
    SveIntermediates {
        i_background,
        i_enhanced,
        i_enhanced_normalized,
        i_enhanced_normalized_vessel,
        i_new,
    }
}

/// Weighted-background SVE on an RGB image; also returns the intermediates.
pub fn sve_weighted_background(
    img: &RasterImage,
    mask: &VesselMask,
    weight: f64,
) -> Result<(RasterImage, SveIntermediates), SveError> {
    ensure_same_dims(img.dims(), mask.dims())?;
    if !(weight.is_finite() && weight >= 0.0) {
        return Err(SveError::InvalidWeight(weight));
    }
    let hsi = rgb_to_hsi(img);
    let parts = weighted_background_intensity(hsi.intensity(), mask.values(), weight);
    let out = hsi_to_rgb(&hsi.with_intensity(parts.i_new.clone())?);
    Ok((out, parts))
}

/// Applies an intensity-channel strategy in HSI space, H and S untouched.
pub fn sve_apply_hsi(
    hsi: &HsiImage,
    mask: &VesselMask,
    strategy: &SveStrategy,
) -> Result<HsiImage, SveError> {
    ensure_same_dims(hsi.dims(), mask.dims())?;
    strategy.validate()?;
    let intensity = hsi.intensity();
    let m = mask.values();
    let new_i: Vec<f64> = match strategy.variant {
        SveVariant::VesselOnly => intensity
            .iter()
            .zip(m)
            .map(|(i, v)| i * f64::from(*v))
            .collect(),
        SveVariant::WeightedOrigin => intensity
            .iter()
            .zip(m)
            .map(|(i, v)| (i + f64::from(*v) * 255.0 * strategy.weight).clamp(0.0, 255.0))
            .collect(),
        SveVariant::WeightedBackground => {
            weighted_background_intensity(intensity, m, strategy.weight).i_new
        }
        SveVariant::GammaOrigin => intensity
            .iter()
            .zip(m)
            .map(|(i, v)| {
                if *v == 1 {
                    255.0 * (i / 255.0).powf(strategy.gamma)
                } else {
                    *i
                }
            })
            .collect(),
        SveVariant::HeatmapOrigin => return Err(SveError::RgbOnlyStrategy),
    };
    Ok(hsi.with_intensity(new_i)?)
}

/// Applies any strategy and returns the 8-bit result.
pub fn sve_apply(
    img: &RasterImage,
    mask: &VesselMask,
    strategy: &SveStrategy,
) -> Result<RasterImage, SveError> {
    ensure_same_dims(img.dims(), mask.dims())?;
    strategy.validate()?;
    if strategy.variant == SveVariant::HeatmapOrigin {
        return Ok(heatmap_vessels(img, mask));
    }
    let hsi = rgb_to_hsi(img);
    Ok(hsi_to_rgb(&sve_apply_hsi(&hsi, mask, strategy)?))
}

/// 256-entry blue-to-red colour table in four linear segments of 64 entries.
/// With `ramp(t) = floor(255 t / 63)` for `t` in `0..=63`:
///
/// | index `v`  | R                 | G                       | B                       |
/// |------------|-------------------|-------------------------|-------------------------|
/// | 0..=63     | 0                 | ramp(v)                 | 255                     |
/// | 64..=127   | 0                 | 255                     | 255 - ramp(v - 64)      |
/// | 128..=191  | ramp(v - 128)     | 255                     | 0                       |
/// | 192..=255  | 255               | 255 - ramp(v - 192)     | 0                       |
pub const HEATMAP_LUT: [[u8; 3]; 256] = build_heatmap_lut();

const fn ramp(t: usize) -> u8 {
    (255 * t / 63) as u8
}

const fn build_heatmap_lut() -> [[u8; 3]; 256] {
    let mut lut = [[0u8; 3]; 256];
    let mut v = 0usize;
    while v < 256 {
        lut[v] = match v {
            0..=63 => [0, ramp(v), 255],
            64..=127 => [0, 255, 255 - ramp(v - 64)],
            128..=191 => [ramp(v - 128), 255, 0],
            _ => [255, 255 - ramp(v - 192), 0],
        };
        v += 1;
    }
    lut
}

fn heatmap_vessels(img: &RasterImage, mask: &VesselMask) -> RasterImage {
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if mask.get(x, y) {
                let [r, g, b] = img.pixel(x, y);
                let i = (f64::from(r) + f64::from(g) + f64::from(b)) / 3.0;
                out.set_pixel(x, y, HEATMAP_LUT[round_u8(i) as usize]);
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum RowError {
    #[error("sample has no mask path")]
    MissingMask,
    #[error(transparent)]
    Io(#[from] ImageIoError),
    #[error(transparent)]
    Sve(#[from] SveError),
}

/// Result of a batch run: the successfully enhanced rows, with their image
/// path pointing at the enhanced file, and one error per failed row.
#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub rows: Vec<SampleRecord>,
    pub outputs: Vec<PathBuf>,
    pub errors: Vec<(String, RowError)>,
}

/// Output file name for a sample id.
pub fn enhanced_file_name(id: &str) -> String {
    format!("{id}_sve.png")
}

/// Enhances every row into `out_dir`. Row failures are collected rather than
/// aborting the batch; row order is preserved in the outcome.
///
/// `resolve` maps the manifest's stored paths to readable locations.
pub fn batch_enhance(
    rows: &[SampleRecord],
    strategy: &SveStrategy,
    out_dir: &Path,
    resolve: impl Fn(&Path) -> PathBuf + Sync,
) -> Result<BatchOutcome, std::io::Error> {
    std::fs::create_dir_all(out_dir)?;
    let results: Vec<Result<PathBuf, RowError>> = rows
        .par_iter()
        .map(|row| {
            let mask_path = row.mask.as_ref().ok_or(RowError::MissingMask)?;
            let img = load_raster(resolve(&row.image))?;
            let mask = load_mask(resolve(mask_path))?;
            let out = sve_apply(&img, &mask, strategy)?;
            let path = out_dir.join(enhanced_file_name(&row.id));
            save_raster(&out, &path)?;
            Ok(path)
        })
        .collect();
    let mut outcome = BatchOutcome::default();
    for (row, result) in rows.iter().zip(results) {
        match result {
            Ok(path) => {
                let mut updated = row.clone();
                updated.image = path.clone();
                outcome.rows.push(updated);
                outcome.outputs.push(path);
            }
            Err(e) => outcome.errors.push((row.id.clone(), e)),
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_row(values: &[u8]) -> RasterImage {
        RasterImage::from_fn(values.len(), 1, |x, _| [values[x]; 3]).unwrap()
    }

    #[test]
    fn hand_evaluated_weighted_background() {
        let img = gray_row(&[50, 100, 200]);
        let mask = VesselMask::from_values(3, 1, vec![0, 1, 0]).unwrap();
        let (out, parts) = sve_weighted_background(&img, &mask, 0.2).unwrap();
        assert_eq!(parts.i_enhanced, vec![50.0, 151.0, 200.0]);
        let expected_mid = 101.0 / 150.0 * 255.0;
        assert_eq!(parts.i_enhanced_normalized[0], 0.0);
        assert!((parts.i_enhanced_normalized[1] - expected_mid).abs() < 1e-12);
        assert!((expected_mid - 171.7).abs() < 0.01);
        assert_eq!(parts.i_enhanced_normalized[2], 255.0);
        assert_eq!(parts.i_new[0], 50.0);
        assert!((parts.i_new[1] - expected_mid).abs() < 1e-12);
        assert_eq!(parts.i_new[2], 200.0);
        assert_eq!(out.pixel(1, 0), [172; 3]);
    }

    #[test]
    fn empty_mask_is_identity() {
        let img = RasterImage::from_fn(7, 5, |x, y| [(x * 30) as u8, (y * 40) as u8, 90]).unwrap();
        let mask = VesselMask::zeros(7, 5).unwrap();
        for w in [0.0, 0.2, 1.0] {
            let (out, parts) = sve_weighted_background(&img, &mask, w).unwrap();
            assert!(parts.i_enhanced_normalized_vessel.iter().all(|v| *v == 0.0));
            for (a, b) in out.as_raw().iter().zip(img.as_raw()) {
                assert!((i16::from(*a) - i16::from(*b)).abs() <= 1);
            }
        }
    }

    #[test]
    fn full_range_weight_zero_is_identity() {
        let img = gray_row(&[0, 17, 128, 255]);
        let mask = VesselMask::from_values(4, 1, vec![1, 0, 1, 1]).unwrap();
        let (out, parts) = sve_weighted_background(&img, &mask, 0.0).unwrap();
        assert_eq!(parts.i_new, vec![0.0, 17.0, 128.0, 255.0]);
        assert_eq!(out, img);
    }

    #[test]
    fn degenerate_stretch_uses_midpoint() {
        let img = gray_row(&[90, 90]);
        let mask = VesselMask::ones(2, 1).unwrap();
        let (_, parts) = sve_weighted_background(&img, &mask, 0.2).unwrap();
        assert_eq!(parts.i_enhanced_normalized, vec![128.0, 128.0]);
        assert_eq!(parts.i_new, vec![128.0, 128.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let img = gray_row(&[1, 2, 3]);
        let mask = VesselMask::zeros(2, 1).unwrap();
        assert!(matches!(
            sve_weighted_background(&img, &mask, 0.2),
            Err(SveError::Image(ImageError::DimensionMismatch { .. }))
        ));
        assert!(sve_apply(&img, &mask, &SveStrategy::default()).is_err());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("gamma-origin".parse::<SveVariant>().unwrap(), SveVariant::GammaOrigin);
        assert!(matches!(
            "sharpen".parse::<SveVariant>(),
            Err(SveError::UnknownStrategy(_))
        ));
        assert!(SveStrategy::new(SveVariant::GammaOrigin, 0.2, 0.0).is_err());
        assert!(SveStrategy::new(SveVariant::WeightedOrigin, -0.1, 0.5).is_err());
    }

    #[test]
    fn vessel_only_full_mask_keeps_image() {
        let img = RasterImage::from_fn(6, 4, |x, y| [(x * 40) as u8, 33, (y * 60) as u8]).unwrap();
        let strategy = SveStrategy::new(SveVariant::VesselOnly, 0.2, 0.5).unwrap();
        let out = sve_apply(&img, &VesselMask::ones(6, 4).unwrap(), &strategy).unwrap();
        for (a, b) in out.as_raw().iter().zip(img.as_raw()) {
            assert!((i16::from(*a) - i16::from(*b)).abs() <= 1);
        }
        let black = sve_apply(&img, &VesselMask::zeros(6, 4).unwrap(), &strategy).unwrap();
        assert!(black.as_raw().iter().all(|v| *v == 0));
    }

    #[test]
    fn weighted_origin_adds_scaled_mask() {
        let img = gray_row(&[200, 240]);
        let mask = VesselMask::ones(2, 1).unwrap();
        let strategy = SveStrategy::new(SveVariant::WeightedOrigin, 0.2, 0.5).unwrap();
        let hsi = sve_apply_hsi(&rgb_to_hsi(&img), &mask, &strategy).unwrap();
        assert_eq!(hsi.intensity(), &[251.0, 255.0]);
    }

    #[test]
    fn gamma_brightens_vessels_only() {
        let hsi = HsiImage::from_channels(2, 1, vec![0.0; 2], vec![0.0; 2], vec![63.75, 63.75]).unwrap();
        let mask = VesselMask::from_values(2, 1, vec![1, 0]).unwrap();
        let strategy = SveStrategy::new(SveVariant::GammaOrigin, 0.2, 0.5).unwrap();
        let out = sve_apply_hsi(&hsi, &mask, &strategy).unwrap();
        assert!((out.intensity()[0] - 127.5).abs() < 1e-12);
        assert_eq!(out.intensity()[1], 63.75);
    }

    #[test]
    fn heatmap_recolours_vessels() {
        let img = gray_row(&[0, 255, 128]);
        let mask = VesselMask::from_values(3, 1, vec![1, 1, 0]).unwrap();
        let strategy = SveStrategy::new(SveVariant::HeatmapOrigin, 0.2, 0.5).unwrap();
        let out = sve_apply(&img, &mask, &strategy).unwrap();
        assert_eq!(out.pixel(0, 0), [0, 0, 255]);
        assert_eq!(out.pixel(1, 0), [255, 0, 0]);
        assert_eq!(out.pixel(2, 0), [128; 3]);
        assert!(matches!(
            sve_apply_hsi(&rgb_to_hsi(&img), &mask, &strategy),
            Err(SveError::RgbOnlyStrategy)
        ));
    }

    #[test]
    fn heatmap_lut_endpoints() {
        assert_eq!(HEATMAP_LUT[0], [0, 0, 255]);
        assert_eq!(HEATMAP_LUT[63], [0, 255, 255]);
        assert_eq!(HEATMAP_LUT[64], [0, 255, 255]);
        assert_eq!(HEATMAP_LUT[127], [0, 255, 0]);
        assert_eq!(HEATMAP_LUT[191], [255, 255, 0]);
        assert_eq!(HEATMAP_LUT[255], [255, 0, 0]);
        assert_eq!(HEATMAP_LUT[32], [0, 129, 255]);
    }
}
