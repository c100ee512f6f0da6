//! Local binary pattern histograms.
//!
//! Neighbours are the eight pixels on the square ring at Chebyshev distance
//! `radius`, enumerated clockwise from the top-left corner:
//!
//! ```text
//! 0 1 2
//! 7 c 3
//! 6 5 4
//! ```
//!
//! Bit `k` of the code is set when neighbour `k` is greater than or equal to
//! the centre. Integer offsets keep the codes purely comparison based, so the
//! histogram is invariant under any strictly increasing grey-level mapping.

use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureVector};
use crate::imaging::GrayMatrix;

/// 58 uniform patterns plus one catch-all bin.
pub const UNIFORM_BINS: usize = 59;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbpParams {
    pub radius: usize,
    pub neighbors: usize,
    pub uniform: bool,
}

impl Default for LbpParams {
    fn default() -> Self {
        LbpParams {
            radius: 1,
            neighbors: 8,
            uniform: true,
        }
    }
}

impl LbpParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.radius == 0 || self.neighbors != 8 {
            return Err(FeatureError::InvalidParams(format!(
                "{self:?} (radius must be >= 1 and exactly 8 neighbours are supported)"
            )));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        if self.uniform {
            UNIFORM_BINS
        } else {
            256
        }
    }

    pub fn descriptor_id(&self) -> String {
        format!(
            "lbp(r={},p={},{})",
            self.radius,
            self.neighbors,
            if self.uniform { "uniform" } else { "full" }
        )
    }
}

/// Number of 0/1 transitions around the circular 8-bit code.
pub fn transitions(code: u8) -> u32 {
    (code ^ code.rotate_right(1)).count_ones()
}

/// Histogram bin for every 8-bit code under the uniform mapping: uniform codes
/// (at most two transitions) take bins `0..58` in increasing code order, all
/// others share bin 58.
pub fn uniform_bin_table() -> [u8; 256] {
    let mut table = [0u8; 256];
    let mut next = 0u8;
    for code in 0..=255u8 {
        table[code as usize] = if transitions(code) <= 2 {
            next += 1;
            next - 1
        } else {
            (UNIFORM_BINS - 1) as u8
        };
    }
    debug_assert_eq!(next as usize, UNIFORM_BINS - 1);
    table
}

/// The pattern code at interior pixel `(x, y)`.
pub fn lbp_code(gray: &GrayMatrix, x: usize, y: usize, radius: usize) -> u8 {
    let c = gray.get(x, y);
    let (l, r, t, b) = (x - radius, x + radius, y - radius, y + radius);
    let ring = [
        (l, t),
        (x, t),
        (r, t),
        (r, y),
        (r, b),
        (x, b),
        (l, b),
        (l, y),
    ];
    ring.iter()
        .enumerate()
        .fold(0u8, |code, (k, (nx, ny))| {
            if gray.get(*nx, *ny) >= c {
                code | (1 << k)
            } else {
                code
            }
        })
}

/// L1-normalised LBP histogram over all pixels at least `radius` from the border.
pub fn lbp(gray: &GrayMatrix, params: &LbpParams) -> Result<FeatureVector, FeatureError> {
    params.validate()?;
    let (w, h) = (gray.width(), gray.height());
    let r = params.radius;
    if w <= 2 * r || h <= 2 * r {
        return Err(FeatureError::ImageTooSmall {
            width: w,
            height: h,
            detail: format!("LBP with radius {r} needs more than {0}x{0} pixels", 2 * r),
        });
    }
    let table = uniform_bin_table();
    let mut hist = vec![0.0; params.dimension()];
    for y in r..h - r {
        for x in r..w - r {
            let code = lbp_code(gray, x, y, r);
            let bin = if params.uniform {
                table[code as usize] as usize
            } else {
                code as usize
            };
            hist[bin] += 1.0;
        }
    }
    let total = ((w - 2 * r) * (h - 2 * r)) as f64;
    hist.iter_mut().for_each(|v| *v /= total);
    Ok(FeatureVector::new(hist, params.descriptor_id()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, values: &[f64]) -> GrayMatrix {
        GrayMatrix::from_vec(w, h, values.to_vec()).unwrap()
    }

    #[test]
    fn uniform_table_has_58_patterns() {
        let table = uniform_bin_table();
        let uniform = (0..=255u8).filter(|c| transitions(*c) <= 2).count();
        assert_eq!(uniform, 58);
        assert_eq!(table[0], 0);
        assert_eq!(table[255], 57);
        assert_eq!(table[0b0101_0101], 58);
    }

    #[test]
    fn constant_image_is_all_ones_code() {
        let g = GrayMatrix::from_fn(6, 5, |_, _| 3.0).unwrap();
        assert_eq!(lbp_code(&g, 2, 2, 1), 255);
        let v = lbp(&g, &LbpParams::default()).unwrap();
        let bin = uniform_bin_table()[255] as usize;
        assert_eq!(v.values[bin], 1.0);
        assert_eq!(v.values.iter().sum::<f64>(), 1.0);
        let full = lbp(&g, &LbpParams { uniform: false, ..LbpParams::default() }).unwrap();
        assert_eq!(full.values.len(), 256);
        assert_eq!(full.values[255], 1.0);
    }

    #[test]
    fn hand_code() {
        #[rustfmt::skip]
        let g = gray(3, 3, &[
            6.0, 11.0, 14.0,
            9.0, 10.0, 10.0,
            19.0, 0.0, 22.0,
        ]);
        // Neighbours clockwise from top-left: 6 11 14 10 22 0 19 9.
        assert_eq!(lbp_code(&g, 1, 1, 1), 0b0101_1110);
    }

    #[test]
    fn too_small_and_params() {
        let g = GrayMatrix::from_fn(2, 9, |_, _| 0.0).unwrap();
        assert!(matches!(lbp(&g, &LbpParams::default()), Err(FeatureError::ImageTooSmall { .. })));
        let g = GrayMatrix::from_fn(5, 5, |_, _| 0.0).unwrap();
        assert!(lbp(&g, &LbpParams { radius: 2, ..LbpParams::default() }).is_ok());
        assert!(lbp(&g, &LbpParams { radius: 0, ..LbpParams::default() }).is_err());
        assert!(lbp(&g, &LbpParams { neighbors: 16, ..LbpParams::default() }).is_err());
    }

    fn small_image() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (3usize..12, 3usize..12).prop_flat_map(|(w, h)| {
            (Just(w), Just(h), proptest::collection::vec(0u8..=255, w * h))
                .prop_map(|(w, h, v)| (w, h, v.into_iter().map(f64::from).collect()))
        })
    }

    proptest! {
        #[test]
        fn histogram_sums_to_one((w, h, v) in small_image(), uniform: bool) {
            let g = gray(w, h, &v);
            let hist = lbp(&g, &LbpParams { uniform, ..LbpParams::default() }).unwrap();
            prop_assert!((hist.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn invariant_to_shift_and_monotone_maps((w, h, v) in small_image(), c in -500i32..500) {
            let g = gray(w, h, &v);
            let base = lbp(&g, &LbpParams::default()).unwrap();
            let shifted = g.map(|x| x + f64::from(c));
            prop_assert_eq!(&lbp(&shifted, &LbpParams::default()).unwrap().values, &base.values);
            let cubed = g.map(|x| (x - 100.0).powi(3) * 2.0 + 7.0);
            prop_assert_eq!(&lbp(&cubed, &LbpParams::default()).unwrap().values, &base.values);
        }
    }
}
