//! Raster, mask and HSI representations shared by every stage.

mod color;
mod io;

pub use color::{hsi_pixel_to_rgb, hsi_to_rgb, rgb_pixel_to_hsi, rgb_to_hsi, to_grayscale};
pub use io::{load_mask, load_raster, save_mask, save_raster, ImageIoError};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("buffer holds {actual} values, expected {expected} for {width}x{height}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("mask value {value} at index {index} is not binary")]
    NonBinaryMask { index: usize, value: u8 },
    #[error("dimension mismatch: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },
}

fn check_dims(width: usize, height: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        Err(ImageError::EmptyDimensions { width, height })
    } else {
        Ok(())
    }
}

pub(crate) fn ensure_same_dims(
    a: (usize, usize),
    b: (usize, usize),
) -> Result<(), ImageError> {
    if a == b {
        Ok(())
    } else {
        Err(ImageError::DimensionMismatch {
            a_width: a.0,
            a_height: a.1,
            b_width: b.0,
            b_height: b.1,
        })
    }
}

/// 8-bit RGB image, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RasterImage {
    /// All-black image.
    pub fn new(width: usize, height: usize) -> Result<Self, ImageError> {
        Self::filled(width, height, [0, 0, 0])
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let expected = width * height * 3;
        if data.len() != expected {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected,
                actual: data.len(),
            });
        }
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// Bilinear resize using pixel-centre alignment.
    pub fn resize_bilinear(&self, new_width: usize, new_height: usize) -> Result<Self, ImageError> {
        check_dims(new_width, new_height)?;
        if (new_width, new_height) == self.dims() {
            return Ok(self.clone());
        }
        let sx = self.width as f64 / new_width as f64;
        let sy = self.height as f64 / new_height as f64;
        RasterImage::from_fn(new_width, new_height, |x, y| {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let sample = self.sample_bilinear_clamped(fx, fy);
            [round_u8(sample[0]), round_u8(sample[1]), round_u8(sample[2])]
        })
    }

    /// Bilinear sample at real coordinates already clamped to the image.
    pub(crate) fn sample_bilinear_clamped(&self, fx: f64, fy: f64) -> [f64; 3] {
        let x0 = fx.floor() as usize;
        let y0 = fy.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = fx - x0 as f64;
        let ty = fy - y0 as f64;
        let p00 = self.pixel(x0, y0);
        let p10 = self.pixel(x1, y0);
        let p01 = self.pixel(x0, y1);
        let p11 = self.pixel(x1, y1);
        let mut out = [0.0; 3];
        for c in 0..3 {
            let top = f64::from(p00[c]) * (1.0 - tx) + f64::from(p10[c]) * tx;
            let bottom = f64::from(p01[c]) * (1.0 - tx) + f64::from(p11[c]) * tx;
            out[c] = top * (1.0 - ty) + bottom * ty;
        }
        out
    }

    /// Copy of the `w`x`h` window whose top-left corner is `(left, top)`.
    pub fn crop(&self, left: usize, top: usize, w: usize, h: usize) -> Result<Self, ImageError> {
        check_dims(w, h)?;
        assert!(left + w <= self.width && top + h <= self.height, "crop window out of bounds");
        RasterImage::from_fn(w, h, |x, y| self.pixel(left + x, top + y))
    }
}

/// Rounds half-up and clamps into the 8-bit range.
pub fn round_u8(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Image in hue / saturation / intensity form.
///
/// Hue is in degrees `[0, 360)`, saturation in `[0, 1]`, intensity on the
/// 0-255 scale and kept real-valued until conversion back to RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiImage {
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) hue: Vec<f64>,
    pub(crate) saturation: Vec<f64>,
    pub(crate) intensity: Vec<f64>,
}

impl HsiImage {
    pub fn from_channels(
        width: usize,
        height: usize,
        hue: Vec<f64>,
        saturation: Vec<f64>,
        intensity: Vec<f64>,
    ) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let n = width * height;
        for len in [hue.len(), saturation.len(), intensity.len()] {
            if len != n {
                return Err(ImageError::BufferSize {
                    width,
                    height,
                    expected: n,
                    actual: len,
                });
            }
        }
        Ok(HsiImage {
            width,
            height,
            hue,
            saturation,
            intensity,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn hue(&self) -> &[f64] {
        &self.hue
    }

    pub fn saturation(&self) -> &[f64] {
        &self.saturation
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    /// Same hue and saturation with a replacement intensity channel.
    pub fn with_intensity(&self, intensity: Vec<f64>) -> Result<Self, ImageError> {
        HsiImage::from_channels(
            self.width,
            self.height,
            self.hue.clone(),
            self.saturation.clone(),
            intensity,
        )
    }
}

/// Binary vessel mask, one value in {0, 1} per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VesselMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl VesselMask {
    pub fn from_values(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected: width * height,
                actual: data.len(),
            });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| **v > 1) {
            return Err(ImageError::NonBinaryMask { index, value });
        }
        Ok(VesselMask {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self, ImageError> {
        Self::from_values(width, height, vec![0; width * height])
    }

    pub fn ones(width: usize, height: usize) -> Result<Self, ImageError> {
        Self::from_values(width, height, vec![1; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(u8::from(f(x, y)));
            }
        }
        Ok(VesselMask {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == 1
    }

    pub fn vessel_count(&self) -> usize {
        self.data.iter().filter(|v| **v == 1).count()
    }
}

/// Real-valued single-channel image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMatrix {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayMatrix {
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(GrayMatrix {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(GrayMatrix {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayMatrix {
        GrayMatrix {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate() {
        assert!(RasterImage::new(0, 3).is_err());
        assert!(RasterImage::from_raw(2, 2, vec![0; 11]).is_err());
        let err = VesselMask::from_values(2, 1, vec![0, 2]).unwrap_err();
        assert_eq!(err, ImageError::NonBinaryMask { index: 1, value: 2 });
    }

    #[test]
    fn round_half_up() {
        assert_eq!(round_u8(0.5), 1);
        assert_eq!(round_u8(1.49), 1);
        assert_eq!(round_u8(254.5), 255);
        assert_eq!(round_u8(300.0), 255);
        assert_eq!(round_u8(-3.0), 0);
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = RasterImage::filled(5, 3, [10, 20, 30]).unwrap();
        let big = img.resize_bilinear(17, 11).unwrap();
        assert!(big.pixels().all(|p| p == [10, 20, 30]));
        assert_eq!(img.resize_bilinear(5, 3).unwrap(), img);
    }

    #[test]
    fn crop_copies_window() {
        let img = RasterImage::from_fn(4, 3, |x, y| [x as u8, y as u8, 0]).unwrap();
        let c = img.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.pixel(0, 0), [1, 1, 0]);
        assert_eq!(c.pixel(1, 1), [2, 2, 0]);
    }
}
