//! Seeded augmentation operations and the class-balancing plan.
//!
//! Every operation is a pure function of its inputs and seed. Plans are built
//! per class: derived samples cycle through the configured rotation angles,
//! then horizontal and vertical mirroring, Gaussian noise and same-class
//! cutmix, until the class reaches its target count.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Manifest, Provenance, SampleRecord, Split};
use crate::imaging::{
    ensure_same_dims, load_raster, round_u8, save_raster, ImageError, ImageIoError, RasterImage,
};
use crate::label::Label;
use crate::seed;

/// Rotation angles (degrees) cycled by the balancing plan.
pub const DEFAULT_ANGLES: [f64; 11] = [
    5.0, -5.0, 10.0, -10.0, 15.0, -15.0, 30.0, -30.0, 45.0, -45.0, 90.0,
];
/// Remaining quarter turns, appended after [`DEFAULT_ANGLES`].
pub const QUARTER_TURNS: [f64; 2] = [180.0, 270.0];
pub const DEFAULT_NOISE_STD: f64 = 10.0;
pub const DEFAULT_CROP_RATIO: f64 = 0.9;
/// Bounds on the pasted rectangle's share of the image area.
pub const CUTMIX_AREA_RANGE: (f64, f64) = (0.1, 0.4);

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Io(#[from] ImageIoError),
    #[error("noise standard deviation must be finite and >= 0, got {0}")]
    InvalidStd(f64),
    #[error("cutmix sources have different labels ({0} vs {1})")]
    ClassMismatch(Label, Label),
    #[error("crop {crop_w}x{crop_h} does not fit in a {width}x{height} image")]
    CropTooLarge {
        crop_w: usize,
        crop_h: usize,
        width: usize,
        height: usize,
    },
    #[error("crop ratio must be in (0, 1], got {0}")]
    InvalidCropRatio(f64),
    #[error("class {0} has no samples to augment")]
    EmptyClass(Label),
    #[error("target {target} is below the largest class count {largest} (allow undershoot to proceed)")]
    TargetBelowLargest { target: usize, largest: usize },
    #[error("plan references unknown sample {0:?}")]
    DanglingSource(String),
    #[error("plan source {id:?} is in the {split} split, which is not eligible for augmentation")]
    IneligibleSource { id: String, split: Split },
    #[error("plan source {id:?} has label {found}, plan expects {expected}")]
    LabelMismatch { id: String, expected: Label, found: Label },
    #[error("derived id {0:?} collides with an existing sample")]
    IdCollision(String),
    #[error("i/o error on {path}: {source}")]
    Fs {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MirrorAxis {
    /// Left-right flip.
    Horizontal,
    /// Top-bottom flip.
    Vertical,
}

/// Snap tolerance for source coordinates, so exact quarter turns and the
/// identity sample the grid without interpolation drift.
const GRID_EPS: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < GRID_EPS {
        r
    } else {
        v
    }
}

/// Rotates counter-clockwise (as displayed, y pointing down) about the image
/// centre with bilinear interpolation; uncovered pixels are black.
pub fn rotate(img: &RasterImage, angle_deg: f64) -> RasterImage {
    let theta = angle_deg.rem_euclid(360.0).to_radians();
    let (sin, cos) = (snap(theta.sin()), snap(theta.cos()));
    let (w, h) = (img.width() as f64, img.height() as f64);
    let cx = (w - 1.0) / 2.0;
    let cy = (h - 1.0) / 2.0;
    RasterImage::from_fn(img.width(), img.height(), |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        // Inverse mapping: output pixel -> source location.
        let sx = snap(cx + cos * dx - sin * dy);
        let sy = snap(cy + sin * dx + cos * dy);
        if sx < 0.0 || sy < 0.0 || sx > w - 1.0 || sy > h - 1.0 {
            return [0, 0, 0];
        }
        let p = img.sample_bilinear_clamped(sx, sy);
        [round_u8(p[0]), round_u8(p[1]), round_u8(p[2])]
    })
    .expect("same dimensions as a valid image")
}

pub fn mirror(img: &RasterImage, axis: MirrorAxis) -> RasterImage {
    let (w, h) = img.dims();
    RasterImage::from_fn(w, h, |x, y| match axis {
        MirrorAxis::Horizontal => img.pixel(w - 1 - x, y),
        MirrorAxis::Vertical => img.pixel(x, h - 1 - y),
    })
    .expect("same dimensions as a valid image")
}

/// Adds independent `N(mean, std)` draws to every channel of every pixel, then
/// clamps and rounds.
pub fn add_gaussian_noise(
    img: &RasterImage,
    mean: f64,
    std: f64,
    seed: u64,
) -> Result<RasterImage, AugmentError> {
    if !(std.is_finite() && std >= 0.0) {
        return Err(AugmentError::InvalidStd(std));
    }
    if std == 0.0 && mean == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(mean, std).map_err(|_| AugmentError::InvalidStd(std))?;
    let mut rng = seed::rng(seed);
    let data = img
        .as_raw()
        .iter()
        .map(|v| round_u8(f64::from(*v) + normal.sample(&mut rng)))
        .collect();
    Ok(RasterImage::from_raw(img.width(), img.height(), data)?)
}

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub left: usize,
    pub top: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.left && x < self.left + self.width && y >= self.top && y < self.top + self.height
    }
}

/// Draws the cutmix rectangle: area fraction uniform in
/// [`CUTMIX_AREA_RANGE`], near-square in the image's aspect, uniform position.
/// Very small images may not admit an integer rectangle inside the range; the
/// closest achievable size is used then.
pub fn cutmix_region(width: usize, height: usize, seed: u64) -> Region {
    let mut rng = seed::rng(seed);
    let (lo, hi) = CUTMIX_AREA_RANGE;
    let fraction: f64 = rng.random_range(lo..=hi);
    let total = (width * height) as f64;
    let area = fraction * total;
    let rh = ((area * height as f64 / width as f64).sqrt().round() as usize).clamp(1, height);
    let mut rw = ((area / rh as f64).round() as usize).clamp(1, width);
    while rw > 1 && (rh * rw) as f64 > hi * total {
        rw -= 1;
    }
    while rw < width && ((rh * rw) as f64) < lo * total && ((rh * (rw + 1)) as f64) <= hi * total {
        rw += 1;
    }
    let top = rng.random_range(0..=height - rh);
    let left = rng.random_range(0..=width - rw);
    Region {
        left,
        top,
        width: rw,
        height: rh,
    }
}

/// Pastes a random rectangle of `b` into `a`. Both images must share a label.
pub fn cutmix_same_class(
    a: &RasterImage,
    b: &RasterImage,
    label_a: Label,
    label_b: Label,
    seed: u64,
) -> Result<RasterImage, AugmentError> {
    cutmix_with_region(a, b, label_a, label_b, seed).map(|(img, _)| img)
}

/// [`cutmix_same_class`], also returning the pasted region.
pub fn cutmix_with_region(
    a: &RasterImage,
    b: &RasterImage,
    label_a: Label,
    label_b: Label,
    seed: u64,
) -> Result<(RasterImage, Region), AugmentError> {
    if label_a != label_b {
        return Err(AugmentError::ClassMismatch(label_a, label_b));
    }
    ensure_same_dims(a.dims(), b.dims())?;
    let region = cutmix_region(a.width(), a.height(), seed);
    let out = RasterImage::from_fn(a.width(), a.height(), |x, y| {
        if region.contains(x, y) {
            b.pixel(x, y)
        } else {
            a.pixel(x, y)
        }
    })?;
    Ok((out, region))
}

/// Crops a `crop_w`x`crop_h` window at a seeded uniform position.
pub fn random_crop(
    img: &RasterImage,
    crop_h: usize,
    crop_w: usize,
    seed: u64,
) -> Result<RasterImage, AugmentError> {
    random_crop_with_offset(img, crop_h, crop_w, seed).map(|(c, _)| c)
}

/// [`random_crop`], also returning the `(left, top)` offset.
pub fn random_crop_with_offset(
    img: &RasterImage,
    crop_h: usize,
    crop_w: usize,
    seed: u64,
) -> Result<(RasterImage, (usize, usize)), AugmentError> {
    let (w, h) = img.dims();
    if crop_h == 0 || crop_w == 0 || crop_h > h || crop_w > w {
        return Err(AugmentError::CropTooLarge {
            crop_w,
            crop_h,
            width: w,
            height: h,
        });
    }
    let mut rng = seed::rng(seed);
    let top = rng.random_range(0..=h - crop_h);
    let left = rng.random_range(0..=w - crop_w);
    Ok((img.crop(left, top, crop_w, crop_h)?, (left, top)))
}

/// Random crop at `ratio` of each dimension, resized back to the original size.
pub fn random_crop_resized(img: &RasterImage, ratio: f64, seed: u64) -> Result<RasterImage, AugmentError> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(AugmentError::InvalidCropRatio(ratio));
    }
    let (w, h) = img.dims();
    let cw = ((w as f64 * ratio).round() as usize).clamp(1, w);
    let ch = ((h as f64 * ratio).round() as usize).clamp(1, h);
    let crop = random_crop(img, ch, cw, seed)?;
    Ok(crop.resize_bilinear(w, h)?)
}

/// One augmentation step as recorded in plans and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum AugmentOp {
    Rotate { angle: f64 },
    Mirror { axis: MirrorAxis },
    Noise { mean: f64, std: f64 },
    /// Paste from `partner`, which must share the source's label.
    Cutmix { partner: String },
    Crop { ratio: f64 },
}

impl fmt::Display for AugmentOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmentOp::Rotate { angle } => write!(f, "rotate({angle})"),
            AugmentOp::Mirror { axis: MirrorAxis::Horizontal } => f.write_str("mirror(horizontal)"),
            AugmentOp::Mirror { axis: MirrorAxis::Vertical } => f.write_str("mirror(vertical)"),
            AugmentOp::Noise { mean, std } => write!(f, "noise({mean},{std})"),
            AugmentOp::Cutmix { partner } => write!(f, "cutmix({partner})"),
            AugmentOp::Crop { ratio } => write!(f, "crop({ratio})"),
        }
    }
}

/// A derived sample scheduled by the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSample {
    pub derived_id: String,
    pub source: String,
    pub label: Label,
    pub ops: Vec<AugmentOp>,
    /// Seed for the noise / cutmix / crop steps of this sample.
    pub seed: u64,
}

impl PlannedSample {
    /// Every sample the derived image is built from (source first).
    pub fn sources(&self) -> Vec<String> {
        let mut out = vec![self.source.clone()];
        for op in &self.ops {
            if let AugmentOp::Cutmix { partner } = op {
                if !out.contains(partner) {
                    out.push(partner.clone());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub seed: u64,
    pub target_per_class: usize,
    pub classes: BTreeMap<Label, Vec<PlannedSample>>,
}

impl AugmentationPlan {
    pub fn is_empty(&self) -> bool {
        self.classes.values().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    pub fn samples(&self) -> impl Iterator<Item = &PlannedSample> {
        self.classes.values().flatten()
    }

    pub fn derived_count(&self, label: Label) -> usize {
        self.classes.get(&label).map(Vec::len).unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOptions {
    pub target_per_class: usize,
    pub seed: u64,
    pub angles: Vec<f64>,
    pub noise_std: f64,
    /// Permit a target below the largest class; larger classes are left as is.
    pub allow_undershoot: bool,
}

impl PlanOptions {
    pub fn new(target_per_class: usize, seed: u64) -> Self {
        PlanOptions {
            target_per_class,
            seed,
            angles: default_angle_cycle(),
            noise_std: DEFAULT_NOISE_STD,
            allow_undershoot: false,
        }
    }
}

/// The default rotation cycle: small angles first, then quarter turns.
pub fn default_angle_cycle() -> Vec<f64> {
    DEFAULT_ANGLES.iter().chain(&QUARTER_TURNS).copied().collect()
}

/// Largest class count rounded up to a multiple of ten.
pub fn default_target<'a>(counts: impl IntoIterator<Item = &'a usize>) -> usize {
    let largest = counts.into_iter().copied().max().unwrap_or(0);
    largest.div_ceil(10) * 10
}

fn op_cycle(options: &PlanOptions) -> Vec<Option<AugmentOp>> {
    let mut ops: Vec<Option<AugmentOp>> = options
        .angles
        .iter()
        .map(|a| Some(AugmentOp::Rotate { angle: *a }))
        .collect();
    ops.push(Some(AugmentOp::Mirror { axis: MirrorAxis::Horizontal }));
    ops.push(Some(AugmentOp::Mirror { axis: MirrorAxis::Vertical }));
    ops.push(Some(AugmentOp::Noise { mean: 0.0, std: options.noise_std }));
    // Cutmix partner is filled in per source.
    ops.push(None);
    ops
}

/// Schedules derived samples so that every class reaches the target.
///
/// `members` maps each class to the ids of its eligible source samples. Within
/// a class, sources are ordered by id and shuffled with a seed derived from
/// `(seed, label)`; derived sample `k` uses source `k mod n` and the op at
/// position `floor(k / n)` of the op cycle. Once the cycle is exhausted the op
/// is followed by an extra noise step so that no derived image repeats.
pub fn build_balance_plan(
    members: &BTreeMap<Label, Vec<String>>,
    options: &PlanOptions,
) -> Result<AugmentationPlan, AugmentError> {
    let target = options.target_per_class;
    let largest = members.values().map(Vec::len).max().unwrap_or(0);
    if target < largest && !options.allow_undershoot {
        return Err(AugmentError::TargetBelowLargest { target, largest });
    }
    let cycle = op_cycle(options);
    let mut classes = BTreeMap::new();
    for (label, ids) in members {
        if ids.is_empty() {
            return Err(AugmentError::EmptyClass(*label));
        }
        let mut sources = ids.clone();
        sources.sort();
        let mut rng = seed::rng(seed::mix(options.seed, &format!("balance-class-{label}")));
        sources.shuffle(&mut rng);
        let n = sources.len();
        let needed = target.saturating_sub(n);
        let mut planned = Vec::with_capacity(needed);
        for k in 0..needed {
            let source = &sources[k % n];
            let round = k / n;
            let derived_id = format!("{source}__aug{k:03}");
            let sample_seed = seed::mix(options.seed, &derived_id);
            let mut ops = vec![match &cycle[round % cycle.len()] {
                Some(op) => op.clone(),
                None => AugmentOp::Cutmix {
                    partner: if n > 1 {
                        sources[(k % n + 1 + rng.random_range(0..n - 1)) % n].clone()
                    } else {
                        source.clone()
                    },
                },
            }];
            if round >= cycle.len() {
                ops.push(AugmentOp::Noise { mean: 0.0, std: options.noise_std });
            }
            planned.push(PlannedSample {
                derived_id,
                source: source.clone(),
                label: *label,
                ops,
                seed: sample_seed,
            });
        }
        classes.insert(*label, planned);
    }
    Ok(AugmentationPlan {
        seed: options.seed,
        target_per_class: target,
        classes,
    })
}

/// Class members of `manifest` restricted to `splits`.
pub fn eligible_members(manifest: &Manifest, splits: &BTreeSet<Split>) -> BTreeMap<Label, Vec<String>> {
    let mut members: BTreeMap<Label, Vec<String>> = BTreeMap::new();
    for r in manifest.records.iter().filter(|r| splits.contains(&r.split)) {
        members.entry(r.label).or_default().push(r.id.clone());
    }
    members
}

/// Applies a planned sample's ops to its source image.
pub fn apply_ops(
    sample: &PlannedSample,
    load: &dyn Fn(&str) -> Result<RasterImage, AugmentError>,
) -> Result<RasterImage, AugmentError> {
    let mut img = load(&sample.source)?;
    for (step, op) in sample.ops.iter().enumerate() {
        let step_seed = seed::mix(sample.seed, &format!("step-{step}"));
        img = match op {
            AugmentOp::Rotate { angle } => rotate(&img, *angle),
            AugmentOp::Mirror { axis } => mirror(&img, *axis),
            AugmentOp::Noise { mean, std } => add_gaussian_noise(&img, *mean, *std, step_seed)?,
            AugmentOp::Cutmix { partner } => {
                let other = load(partner)?;
                cutmix_same_class(&img, &other, sample.label, sample.label, step_seed)?
            }
            AugmentOp::Crop { ratio } => random_crop_resized(&img, *ratio, step_seed)?,
        };
    }
    Ok(img)
}

/// Writes every derived image into `out_dir` and appends one manifest row per
/// derived sample. Sources must exist, carry the planned label and belong to
/// one of `eligible` splits. Derived rows inherit the source's split.
pub fn execute_plan(
    plan: &AugmentationPlan,
    manifest: &Manifest,
    out_dir: &Path,
    eligible: &BTreeSet<Split>,
) -> Result<Manifest, AugmentError> {
    let mut out = manifest.clone();
    if plan.is_empty() {
        return Ok(out);
    }
    let existing: HashSet<&str> = manifest.records.iter().map(|r| r.id.as_str()).collect();
    let mut derived_ids = HashSet::new();
    for sample in plan.samples() {
        for id in sample.sources() {
            let record = manifest
                .get(&id)
                .ok_or_else(|| AugmentError::DanglingSource(id.clone()))?;
            if !eligible.contains(&record.split) {
                return Err(AugmentError::IneligibleSource {
                    id,
                    split: record.split,
                });
            }
            if record.label != sample.label {
                return Err(AugmentError::LabelMismatch {
                    id,
                    expected: sample.label,
                    found: record.label,
                });
            }
        }
        if existing.contains(sample.derived_id.as_str()) || !derived_ids.insert(sample.derived_id.as_str()) {
            return Err(AugmentError::IdCollision(sample.derived_id.clone()));
        }
    }
    std::fs::create_dir_all(out_dir).map_err(|source| AugmentError::Fs {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let load = |id: &str| -> Result<RasterImage, AugmentError> {
        let record = manifest.get(id).ok_or_else(|| AugmentError::DanglingSource(id.to_string()))?;
        Ok(load_raster(manifest.resolve(&record.image))?)
    };
    let samples: Vec<&PlannedSample> = plan.samples().collect();
    let written: Vec<PathBuf> = samples
        .par_iter()
        .map(|sample| {
            let img = apply_ops(sample, &load)?;
            let path = out_dir.join(format!("{}.png", sample.derived_id));
            save_raster(&img, &path)?;
            Ok(path)
        })
        .collect::<Result<_, AugmentError>>()?;
    for (sample, path) in samples.into_iter().zip(written) {
        let source = manifest.get(&sample.source).expect("validated above");
        out.records.push(SampleRecord {
            id: sample.derived_id.clone(),
            image: path,
            mask: None,
            label: sample.label,
            split: source.split,
            provenance: Provenance::Augmented {
                sources: sample.sources(),
                ops: sample.ops.iter().map(ToString::to_string).collect(),
                seed: sample.seed,
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lbl(v: i64) -> Label {
        Label::new(v).unwrap()
    }

    fn random_image(w: usize, h: usize, seed: u64) -> RasterImage {
        let mut rng = crate::seed::rng(seed);
        RasterImage::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
    }

    fn max_diff(a: &RasterImage, b: &RasterImage) -> i16 {
        a.as_raw()
            .iter()
            .zip(b.as_raw())
            .map(|(x, y)| (i16::from(*x) - i16::from(*y)).abs())
            .max()
            .unwrap()
    }

    #[test]
    fn rotation_identities() {
        let img = random_image(9, 7, 1);
        assert_eq!(rotate(&img, 0.0), img);
        assert!(max_diff(&rotate(&img, 360.0), &img) <= 1);
        let sq = random_image(8, 8, 2);
        assert!(max_diff(&rotate(&rotate(&sq, 90.0), 270.0), &sq) <= 2);
        let odd = random_image(7, 7, 3);
        assert!(max_diff(&rotate(&rotate(&odd, 90.0), 270.0), &odd) <= 2);
    }

    #[test]
    fn quarter_turn_moves_corners() {
        let img = RasterImage::from_fn(3, 3, |x, y| [(y * 3 + x) as u8, 0, 0]).unwrap();
        let r = rotate(&img, 90.0);
        // Counter-clockwise: the top-right pixel moves to the top-left.
        assert_eq!(r.pixel(0, 0), img.pixel(2, 0));
        assert_eq!(r.pixel(1, 1), img.pixel(1, 1));
    }

    #[test]
    fn rotation_fills_black() {
        let img = RasterImage::filled(10, 4, [200, 200, 200]).unwrap();
        let r = rotate(&img, 90.0);
        assert_eq!(r.pixel(0, 0), [0, 0, 0]);
    }

    #[test]
    fn mirror_is_an_involution() {
        let img = random_image(5, 7, 4);
        for axis in [MirrorAxis::Horizontal, MirrorAxis::Vertical] {
            assert_eq!(mirror(&mirror(&img, axis), axis), img);
        }
        let pair = RasterImage::from_raw(2, 1, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(mirror(&pair, MirrorAxis::Horizontal).as_raw(), &[4, 5, 6, 1, 2, 3]);
        let both = mirror(&mirror(&img, MirrorAxis::Horizontal), MirrorAxis::Vertical);
        for y in 0..7 {
            for x in 0..5 {
                assert_eq!(both.pixel(x, y), img.pixel(4 - x, 6 - y));
            }
        }
    }

    #[test]
    fn noise_zero_and_determinism() {
        let img = random_image(6, 6, 5);
        assert_eq!(add_gaussian_noise(&img, 0.0, 0.0, 9).unwrap(), img);
        let a = add_gaussian_noise(&img, 0.0, 10.0, 9).unwrap();
        assert_eq!(a, add_gaussian_noise(&img, 0.0, 10.0, 9).unwrap());
        assert_ne!(a, add_gaussian_noise(&img, 0.0, 10.0, 10).unwrap());
        assert!(matches!(
            add_gaussian_noise(&img, 0.0, -1.0, 9),
            Err(AugmentError::InvalidStd(_))
        ));
    }

    #[test]
    fn cutmix_provenance_and_errors() {
        let a = random_image(16, 12, 6);
        let b = random_image(16, 12, 7);
        assert_eq!(cutmix_same_class(&a, &a, lbl(2), lbl(2), 1).unwrap(), a);
        for s in 0..50 {
            let (out, region) = cutmix_with_region(&a, &b, lbl(2), lbl(2), s).unwrap();
            for y in 0..12 {
                for x in 0..16 {
                    let expect = if region.contains(x, y) { b.pixel(x, y) } else { a.pixel(x, y) };
                    assert_eq!(out.pixel(x, y), expect);
                }
            }
        }
        assert!(matches!(
            cutmix_same_class(&a, &b, lbl(1), lbl(2), 0),
            Err(AugmentError::ClassMismatch(..))
        ));
        let c = random_image(5, 5, 8);
        assert!(cutmix_same_class(&a, &c, lbl(1), lbl(1), 0).is_err());
    }

    #[test]
    fn cutmix_area_fraction_in_range() {
        for (w, h) in [(64, 64), (224, 224), (20, 13), (9, 9)] {
            for s in 0..1000 {
                let r = cutmix_region(w, h, s);
                let frac = r.area() as f64 / (w * h) as f64;
                assert!((0.1..=0.4).contains(&frac), "{w}x{h} seed {s}: {frac}");
                assert!(r.left + r.width <= w && r.top + r.height <= h);
            }
        }
    }

    #[test]
    fn crop_cases() {
        let img = random_image(8, 6, 9);
        assert_eq!(random_crop(&img, 6, 8, 3).unwrap(), img);
        let constant = RasterImage::filled(5, 5, [7, 8, 9]).unwrap();
        assert_eq!(random_crop(&constant, 1, 1, 3).unwrap().as_raw(), &[7, 8, 9]);
        for s in 0..20 {
            let (c, (left, top)) = random_crop_with_offset(&img, 3, 4, s).unwrap();
            for y in 0..3 {
                for x in 0..4 {
                    assert_eq!(c.pixel(x, y), img.pixel(left + x, top + y));
                }
            }
        }
        assert!(matches!(
            random_crop(&img, 7, 2, 0),
            Err(AugmentError::CropTooLarge { .. })
        ));
        let resized = random_crop_resized(&img, 0.9, 1).unwrap();
        assert_eq!(resized.dims(), img.dims());
    }

    fn members(counts: &[(i64, usize)]) -> BTreeMap<Label, Vec<String>> {
        counts
            .iter()
            .map(|(l, n)| (lbl(*l), (0..*n).map(|k| format!("s{l}_{k}")).collect()))
            .collect()
    }

    #[test]
    fn plan_counts() {
        let m = members(&[(0, 12), (1, 12)]);
        assert!(build_balance_plan(&m, &PlanOptions::new(12, 1)).unwrap().is_empty());

        let m = members(&[(3, 6), (4, 12)]);
        let plan = build_balance_plan(&m, &PlanOptions::new(12, 1)).unwrap();
        assert_eq!(plan.derived_count(lbl(3)), 6);
        assert!(plan.classes[&lbl(3)]
            .iter()
            .all(|s| m[&lbl(3)].contains(&s.source) && s.sources().iter().all(|id| m[&lbl(3)].contains(id))));

        let m = members(&[(1, 6), (7, 57)]);
        let plan = build_balance_plan(&m, &PlanOptions::new(60, 1)).unwrap();
        assert_eq!(plan.derived_count(lbl(1)), 54);
        assert_eq!(plan.derived_count(lbl(7)), 3);
    }

    #[test]
    fn plan_errors_and_determinism() {
        let m = members(&[(0, 5), (1, 0)]);
        assert!(matches!(
            build_balance_plan(&m, &PlanOptions::new(10, 1)),
            Err(AugmentError::EmptyClass(_))
        ));
        let m = members(&[(0, 15), (1, 3)]);
        assert!(matches!(
            build_balance_plan(&m, &PlanOptions::new(10, 1)),
            Err(AugmentError::TargetBelowLargest { .. })
        ));
        let mut opts = PlanOptions::new(10, 1);
        opts.allow_undershoot = true;
        let plan = build_balance_plan(&m, &opts).unwrap();
        assert_eq!(plan.derived_count(lbl(0)), 0);
        assert_eq!(plan.derived_count(lbl(1)), 7);
        assert_eq!(plan, build_balance_plan(&m, &opts).unwrap());
        assert_eq!(AugmentationPlan::from_json(&plan.to_json()).unwrap(), plan);
    }

    #[test]
    fn plan_op_order() {
        let m = members(&[(2, 1)]);
        let plan = build_balance_plan(&m, &PlanOptions::new(40, 3)).unwrap();
        let ops: Vec<String> = plan.classes[&lbl(2)].iter().map(|s| s.ops[0].to_string()).collect();
        assert_eq!(ops[0], "rotate(5)");
        assert_eq!(ops[12], "rotate(270)");
        assert_eq!(ops[13], "mirror(horizontal)");
        assert_eq!(ops[14], "mirror(vertical)");
        assert_eq!(ops[15], "noise(0,10)");
        assert_eq!(ops[16], "cutmix(s2_0)");
        assert_eq!(ops[17], "rotate(5)");
        assert_eq!(plan.classes[&lbl(2)][17].ops.len(), 2);
    }

    #[test]
    fn default_target_rounds_up() {
        assert_eq!(default_target(&[39, 6, 57]), 60);
        assert_eq!(default_target(&[60]), 60);
        assert_eq!(default_target(&[]), 0);
    }
}
