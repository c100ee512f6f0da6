//! Histogram of oriented gradients.

use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureVector};
use crate::imaging::GrayMatrix;

/// Guards the block normalisation against division by zero.
const NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HogParams {
    /// Cell side in pixels.
    pub cell_size: usize,
    /// Block side in cells.
    pub block_size: usize,
    /// Block step in cells.
    pub block_stride: usize,
    pub bins: usize,
    /// Signed gradients span 360°, unsigned fold onto 180°.
    pub signed: bool,
    /// L2-Hys clipping threshold.
    pub clip: f64,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams {
            cell_size: 8,
            block_size: 2,
            block_stride: 1,
            bins: 9,
            signed: false,
            clip: 0.2,
        }
    }
}

impl HogParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let positive = self.cell_size > 0
            && self.block_size > 0
            && self.block_stride > 0
            && self.bins > 0
            && self.clip.is_finite()
            && self.clip > 0.0;
        if !positive || self.block_stride > self.block_size {
            return Err(FeatureError::InvalidParams(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn descriptor_id(&self) -> String {
        format!(
            "hog(cell={},block={},stride={},bins={},{},clip={})",
            self.cell_size,
            self.block_size,
            self.block_stride,
            self.bins,
            if self.signed { "signed" } else { "unsigned" },
            self.clip
        )
    }

    /// Number of blocks along an axis of `pixels` length, if at least one fits.
    fn blocks_along(&self, pixels: usize) -> Option<usize> {
        let cells = pixels / self.cell_size;
        (cells >= self.block_size).then(|| (cells - self.block_size) / self.block_stride + 1)
    }

    /// Descriptor length for a `width`x`height` image.
    pub fn dimension(&self, width: usize, height: usize) -> Result<usize, FeatureError> {
        self.validate()?;
        match (self.blocks_along(width), self.blocks_along(height)) {
            (Some(bx), Some(by)) => Ok(bx * by * self.block_size * self.block_size * self.bins),
            _ => Err(FeatureError::ImageTooSmall {
                width,
                height,
                detail: format!(
                    "HOG needs at least {0}x{0} pixels",
                    self.cell_size * self.block_size
                ),
            }),
        }
    }
}

/// Per-cell orientation histograms, `cells_y` x `cells_x` x `bins`.
pub(crate) fn cell_histograms(gray: &GrayMatrix, params: &HogParams) -> (usize, usize, Vec<f64>) {
    let (w, h) = (gray.width(), gray.height());
    let cells_x = w / params.cell_size;
    let cells_y = h / params.cell_size;
    let span = if params.signed { 360.0 } else { 180.0 };
    let bin_width = span / params.bins as f64;
    let mut hist = vec![0.0; cells_x * cells_y * params.bins];
    for y in 0..cells_y * params.cell_size {
        for x in 0..cells_x * params.cell_size {
            // Central differences; border rows / columns get zero gradient.
            let gx = if x > 0 && x + 1 < w {
                gray.get(x + 1, y) - gray.get(x - 1, y)
            } else {
                0.0
            };
            let gy = if y > 0 && y + 1 < h {
                gray.get(x, y + 1) - gray.get(x, y - 1)
            } else {
                0.0
            };
            let magnitude = (gx * gx + gy * gy).sqrt();
            if magnitude == 0.0 {
                continue;
            }
            let angle = gy.atan2(gx).to_degrees().rem_euclid(span);
            // Bin centres sit at multiples of the bin width.
            let pos = angle / bin_width;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo = (lo as usize) % params.bins;
            let hi = (lo + 1) % params.bins;
            let cell = (y / params.cell_size) * cells_x + x / params.cell_size;
            hist[cell * params.bins + lo] += magnitude * (1.0 - frac);
            hist[cell * params.bins + hi] += magnitude * frac;
        }
    }
    (cells_x, cells_y, hist)
}

fn l2_normalize(v: &mut [f64]) {
    let norm = (v.iter().map(|x| x * x).sum::<f64>() + NORM_EPS * NORM_EPS).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Computes the HOG descriptor: blocks in row-major order, cells row-major
/// within a block, bins within a cell. Each block is L2 normalised, clipped at
/// `params.clip` and renormalised.
pub fn hog(gray: &GrayMatrix, params: &HogParams) -> Result<FeatureVector, FeatureError> {
    let dim = params.dimension(gray.width(), gray.height())?;
    let (cells_x, cells_y, hist) = cell_histograms(gray, params);
    let bx = (cells_x - params.block_size) / params.block_stride + 1;
    let by = (cells_y - params.block_size) / params.block_stride + 1;
    let mut values = Vec::with_capacity(dim);
    let mut block = Vec::with_capacity(params.block_size * params.block_size * params.bins);
    for j in 0..by {
        for i in 0..bx {
            block.clear();
            for cy in 0..params.block_size {
                for cx in 0..params.block_size {
                    let cell = (j * params.block_stride + cy) * cells_x + i * params.block_stride + cx;
                    block.extend_from_slice(&hist[cell * params.bins..(cell + 1) * params.bins]);
                }
            }
            l2_normalize(&mut block);
            block.iter_mut().for_each(|x| *x = x.min(params.clip));
            l2_normalize(&mut block);
            values.extend_from_slice(&block);
        }
    }
    debug_assert_eq!(values.len(), dim);
    Ok(FeatureVector::new(values, params.descriptor_id()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_dimension() {
        let p = HogParams::default();
        assert_eq!(p.dimension(128, 128).unwrap(), 8100);
        assert_eq!(p.dimension(64, 128).unwrap(), 7 * 15 * 36);
        assert_eq!(p.dimension(224, 224).unwrap(), 27 * 27 * 36);
        let g = GrayMatrix::from_fn(128, 128, |x, y| ((x * 7 + y * 3) % 31) as f64).unwrap();
        assert_eq!(hog(&g, &p).unwrap().values.len(), 8100);
    }

    #[test]
    fn too_small_and_bad_params() {
        let g = GrayMatrix::from_fn(15, 40, |_, _| 0.0).unwrap();
        assert!(matches!(
            hog(&g, &HogParams::default()),
            Err(FeatureError::ImageTooSmall { .. })
        ));
        let bad = HogParams {
            block_stride: 3,
            ..HogParams::default()
        };
        assert!(matches!(bad.validate(), Err(FeatureError::InvalidParams(_))));
    }

    #[test]
    fn constant_image_gives_zeros() {
        let g = GrayMatrix::from_fn(32, 32, |_, _| 77.0).unwrap();
        let v = hog(&g, &HogParams::default()).unwrap();
        assert!(v.values.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn vertical_edge_fills_horizontal_bin() {
        // Left half dark, right half bright: gradient points along +x (0°).
        let g = GrayMatrix::from_fn(16, 16, |x, _| if x >= 8 { 255.0 } else { 0.0 }).unwrap();
        let p = HogParams::default();
        let (_, _, hist) = cell_histograms(&g, &p);
        let mut total = 0.0;
        for cell in hist.chunks(p.bins) {
            assert!(cell[1..].iter().all(|v| *v == 0.0));
            total += cell[0];
        }
        // Two gradient columns (x = 7, 8) over all 16 rows, magnitude 255.
        assert_eq!(total, 2.0 * 16.0 * 255.0);
        let v = hog(&g, &p).unwrap();
        for (k, x) in v.values.iter().enumerate() {
            if k % p.bins != 0 {
                assert_eq!(*x, 0.0);
            }
        }
    }

    #[test]
    fn bin_interpolation_splits_mass() {
        // A 45° ramp lands between the 40° and 60° centres (unsigned, 9 bins).
        let g = GrayMatrix::from_fn(8, 8, |x, y| (x + y) as f64).unwrap();
        let p = HogParams {
            block_size: 1,
            ..HogParams::default()
        };
        let (_, _, hist) = cell_histograms(&g, &p);
        // Interior pixels all have gx = gy = 2; border pixels only feed bins 0, 4 and 5.
        let interior = 36.0 * 8f64.sqrt();
        assert!((hist[2] - 0.75 * interior).abs() < 1e-9);
        assert!((hist[3] - 0.25 * interior).abs() < 1e-9);
        assert_eq!(hist[1], 0.0);
    }
}
