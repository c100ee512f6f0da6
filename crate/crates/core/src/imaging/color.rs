//! Classical arccos HSI model with intensity on the 0-255 scale.
//!
//! `I = (R + G + B) / 3`, `S = 1 - 3 min(R, G, B) / (R + G + B)` and hue from
//! the arccos formulation. Achromatic pixels (S = 0) store hue 0.

use super::{round_u8, GrayMatrix, HsiImage, RasterImage};

/// Converts one RGB pixel to `(hue, saturation, intensity)`.
pub fn rgb_pixel_to_hsi(rgb: [u8; 3]) -> (f64, f64, f64) {
    let r = f64::from(rgb[0]);
    let g = f64::from(rgb[1]);
    let b = f64::from(rgb[2]);
    let sum = r + g + b;
    let intensity = sum / 3.0;
    if rgb[0] == rgb[1] && rgb[1] == rgb[2] {
        return (0.0, 0.0, intensity);
    }
    let min = r.min(g).min(b);
    let saturation = 1.0 - 3.0 * min / sum;
    let num = 0.5 * ((r - g) + (r - b));
    let den = ((r - g) * (r - g) + (r - b) * (g - b)).sqrt();
    let theta = (num / den).clamp(-1.0, 1.0).acos().to_degrees();
    let mut hue = if b <= g { theta } else { 360.0 - theta };
    if hue >= 360.0 {
        hue -= 360.0;
    }
    (hue, saturation, intensity)
}

/// Inverse of [`rgb_pixel_to_hsi`], rounded half-up and clamped to 8 bits.
pub fn hsi_pixel_to_rgb(hue: f64, saturation: f64, intensity: f64) -> [u8; 3] {
    let [r, g, b] = hsi_pixel_to_rgb_real(hue, saturation, intensity);
    [round_u8(r), round_u8(g), round_u8(b)]
}

fn hsi_pixel_to_rgb_real(hue: f64, s: f64, i: f64) -> [f64; 3] {
    if s <= 0.0 {
        return [i, i, i];
    }
    let h = hue.rem_euclid(360.0);
    // Sector formula: the chromatic channel for angle `a` within a 120° sector.
    let lift = |a: f64| i * (1.0 + s * a.to_radians().cos() / (60.0 - a).to_radians().cos());
    let low = i * (1.0 - s);
    if h < 120.0 {
        let r = lift(h);
        [r, 3.0 * i - (r + low), low]
    } else if h < 240.0 {
        let g = lift(h - 120.0);
        [low, g, 3.0 * i - (low + g)]
    } else {
        let b = lift(h - 240.0);
        [3.0 * i - (low + b), low, b]
    }
}

pub fn rgb_to_hsi(img: &RasterImage) -> HsiImage {
    let n = img.pixel_count();
    let mut hue = Vec::with_capacity(n);
    let mut saturation = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    for p in img.pixels() {
        let (h, s, i) = rgb_pixel_to_hsi(p);
        hue.push(h);
        saturation.push(s);
        intensity.push(i);
    }
    HsiImage {
        width: img.width(),
        height: img.height(),
        hue,
        saturation,
        intensity,
    }
}

pub fn hsi_to_rgb(img: &HsiImage) -> RasterImage {
    let mut data = Vec::with_capacity(img.hue.len() * 3);
    for k in 0..img.hue.len() {
        data.extend_from_slice(&hsi_pixel_to_rgb(
            img.hue[k],
            img.saturation[k],
            img.intensity[k],
        ));
    }
    RasterImage::from_raw(img.width, img.height, data).expect("HSI dimensions are valid")
}

/// Luminance `0.299 R + 0.587 G + 0.114 B`.
pub fn to_grayscale(img: &RasterImage) -> GrayMatrix {
    let data = img
        .pixels()
        .map(|[r, g, b]| 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b))
        .collect();
    GrayMatrix::from_vec(img.width(), img.height(), data).expect("raster dimensions are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn achromatic_pixel() {
        assert_eq!(rgb_pixel_to_hsi([100, 100, 100]), (0.0, 0.0, 100.0));
        assert_eq!(hsi_pixel_to_rgb(0.0, 0.0, 42.0), [42, 42, 42]);
    }

    #[test]
    fn pure_red() {
        let (h, s, i) = rgb_pixel_to_hsi([255, 0, 0]);
        assert_eq!(h, 0.0);
        assert_eq!(s, 1.0);
        assert_eq!(i, 85.0);
        assert_eq!(hsi_pixel_to_rgb(0.0, 1.0, 85.0), [255, 0, 0]);
    }

    #[test]
    fn primaries_land_in_their_sectors() {
        let (h, _, _) = rgb_pixel_to_hsi([0, 255, 0]);
        assert!((h - 120.0).abs() < 1e-9);
        let (h, _, _) = rgb_pixel_to_hsi([0, 0, 255]);
        assert!((h - 240.0).abs() < 1e-9);
        assert_eq!(hsi_pixel_to_rgb(120.0, 1.0, 85.0), [0, 255, 0]);
        assert_eq!(hsi_pixel_to_rgb(240.0, 1.0, 85.0), [0, 0, 255]);
    }

    #[test]
    fn black_pixel_is_total() {
        assert_eq!(rgb_pixel_to_hsi([0, 0, 0]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn grayscale_luminance() {
        let img = RasterImage::from_raw(2, 1, vec![255, 255, 255, 255, 0, 0]).unwrap();
        let g = to_grayscale(&img);
        assert!((g.get(0, 0) - 255.0).abs() < 1e-9);
        assert!((g.get(1, 0) - 76.245).abs() < 1e-9);
        let c = to_grayscale(&RasterImage::filled(3, 3, [9, 80, 200]).unwrap());
        assert!(c.as_slice().iter().all(|v| *v == c.get(0, 0)));
    }

    proptest! {
        #[test]
        fn round_trip_within_one(r: u8, g: u8, b: u8) {
            let (h, s, i) = rgb_pixel_to_hsi([r, g, b]);
            prop_assert!((0.0..360.0).contains(&h));
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(i, (f64::from(r) + f64::from(g) + f64::from(b)) / 3.0);
            prop_assert_eq!(s == 0.0, r == g && g == b);
            let back = hsi_pixel_to_rgb(h, s, i);
            for (a, o) in back.iter().zip([r, g, b]) {
                prop_assert!((i16::from(*a) - i16::from(o)).abs() <= 1);
            }
        }

    }
}
