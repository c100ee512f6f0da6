//! PNG (8-bit RGB or gray) and binary PPM (P6, maxval 255) readers and writers.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use image::{ColorType, ExtendedColorType, ImageFormat};
use thiserror::Error;

use super::{RasterImage, VesselMask};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("image file not found: {0}")]
    Missing(PathBuf),
    #[error("malformed image file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("unsupported bit depth in {path}: {detail}")]
    UnsupportedBitDepth { path: PathBuf, detail: String },
    #[error("unsupported image format for {0} (expected PNG or PPM P6)")]
    UnsupportedFormat(PathBuf),
    #[error("unsupported color type in {path}: {detail}")]
    UnsupportedColorType { path: PathBuf, detail: String },
    #[error("mask {path} is not binary: found value {value}")]
    NonBinaryMask { path: PathBuf, value: u8 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, ImageIoError> {
    fs::read(path).map_err(|source| match source.kind() {
        ErrorKind::NotFound => ImageIoError::Missing(path.to_path_buf()),
        _ => ImageIoError::Io {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Loads a PNG or PPM (P6) file; the format is detected from the file contents.
pub fn load_raster(path: impl AsRef<Path>) -> Result<RasterImage, ImageIoError> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    if bytes.starts_with(b"P6") {
        decode_ppm(&bytes, path)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(&bytes, path)
    } else if bytes.len() < PNG_SIGNATURE.len() && PNG_SIGNATURE.starts_with(&bytes) {
        Err(malformed(path, "truncated PNG signature"))
    } else {
        Err(ImageIoError::UnsupportedFormat(path.to_path_buf()))
    }
}

/// Writes PNG or PPM depending on the extension (`.png`, `.ppm`).
pub fn save_raster(img: &RasterImage, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let bytes = match extension(path).as_deref() {
        Some("ppm") => encode_ppm(img),
        Some("png") => encode_png(img, path)?,
        _ => return Err(ImageIoError::UnsupportedFormat(path.to_path_buf())),
    };
    fs::write(path, bytes).map_err(|source| ImageIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a mask stored as an image: black pixels are background, pixels with
/// every channel at 255 (or at 1) are vessel. Anything else is rejected.
pub fn load_mask(path: impl AsRef<Path>) -> Result<VesselMask, ImageIoError> {
    let path = path.as_ref();
    let img = load_raster(path)?;
    let mut values = Vec::with_capacity(img.pixel_count());
    for [r, g, b] in img.pixels() {
        let v = match (r, g, b) {
            (0, 0, 0) => 0,
            (255, 255, 255) | (1, 1, 1) => 1,
            _ => {
                return Err(ImageIoError::NonBinaryMask {
                    path: path.to_path_buf(),
                    value: if r == g && g == b { r } else { r.max(g).max(b) },
                })
            }
        };
        values.push(v);
    }
    Ok(VesselMask::from_values(img.width(), img.height(), values).expect("mask values are binary"))
}

/// Writes a mask as a black / white image.
pub fn save_mask(mask: &VesselMask, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let img = RasterImage::from_fn(mask.width(), mask.height(), |x, y| {
        if mask.get(x, y) {
            [255; 3]
        } else {
            [0; 3]
        }
    })
    .expect("mask dimensions are valid");
    save_raster(&img, path)
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

fn malformed(path: &Path, reason: impl Into<String>) -> ImageIoError {
    ImageIoError::Malformed {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<RasterImage, ImageIoError> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| malformed(path, e.to_string()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded.color() {
        ColorType::Rgb8 => Ok(RasterImage::from_raw(w, h, decoded.into_rgb8().into_raw())
            .map_err(|e| malformed(path, e.to_string()))?),
        ColorType::L8 => {
            let gray = decoded.into_luma8().into_raw();
            let data = gray.iter().flat_map(|v| [*v; 3]).collect();
            RasterImage::from_raw(w, h, data).map_err(|e| malformed(path, e.to_string()))
        }
        ColorType::L16 | ColorType::Rgb16 | ColorType::La16 | ColorType::Rgba16 => {
            Err(ImageIoError::UnsupportedBitDepth {
                path: path.to_path_buf(),
                detail: format!("{:?} (only 8-bit channels are supported)", decoded.color()),
            })
        }
        other => Err(ImageIoError::UnsupportedColorType {
            path: path.to_path_buf(),
            detail: format!("{other:?} (alpha and float images are not supported)"),
        }),
    }
}

fn encode_png(img: &RasterImage, path: &Path) -> Result<Vec<u8>, ImageIoError> {
    use image::ImageEncoder;
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            img.as_raw(),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::Rgb8,
        )
        .map_err(|e| ImageIoError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        })?;
    Ok(out)
}

fn encode_ppm(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

/// Header tokens are separated by whitespace and may be interleaved with
/// `#` comments; exactly one whitespace byte precedes the sample data.
fn decode_ppm(bytes: &[u8], path: &Path) -> Result<RasterImage, ImageIoError> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (k, field) in fields.iter_mut().enumerate() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(malformed(path, "truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(malformed(path, format!("expected header field {k}")));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| malformed(path, format!("header field {text:?} out of range")))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(malformed(path, "missing whitespace after maxval")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(malformed(path, "zero image dimension"));
    }
    if maxval != 255 {
        return Err(ImageIoError::UnsupportedBitDepth {
            path: path.to_path_buf(),
            detail: format!("maxval {maxval} (only 255 is supported)"),
        });
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| malformed(path, "dimensions overflow"))?;
    let data = &bytes[pos..];
    if data.len() < expected {
        return Err(malformed(
            path,
            format!("truncated pixel data: {} of {expected} bytes", data.len()),
        ));
    }
    RasterImage::from_raw(width, height, data[..expected].to_vec())
        .map_err(|e| malformed(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RasterImage {
        RasterImage::from_raw(2, 2, vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 250, 251, 252]).unwrap()
    }

    #[test]
    fn png_and_ppm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["a.png", "a.ppm"] {
            let p = dir.path().join(name);
            save_raster(&sample(), &p).unwrap();
            assert_eq!(load_raster(&p).unwrap(), sample());
        }
    }

    #[test]
    fn missing_file() {
        let err = load_raster("/nonexistent/x.png").unwrap_err();
        assert!(matches!(err, ImageIoError::Missing(_)));
    }

    #[test]
    fn truncated_files_are_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.ppm");
        fs::write(&p, b"P6\n4 4\n255\n\x00\x00\x00").unwrap();
        assert!(matches!(load_raster(&p), Err(ImageIoError::Malformed { .. })));
        fs::write(&p, b"P6\n4").unwrap();
        assert!(matches!(load_raster(&p), Err(ImageIoError::Malformed { .. })));

        let png = dir.path().join("t.png");
        save_raster(&sample(), &png).unwrap();
        let bytes = fs::read(&png).unwrap();
        fs::write(&png, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_raster(&png), Err(ImageIoError::Malformed { .. })));
    }

    #[test]
    fn sixteen_bit_ppm_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("deep.ppm");
        let mut bytes = b"P6 1 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0; 6]);
        fs::write(&p, bytes).unwrap();
        assert!(matches!(
            load_raster(&p),
            Err(ImageIoError::UnsupportedBitDepth { .. })
        ));
    }

    #[test]
    fn sixteen_bit_png_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("deep.png");
        image::save_buffer(&p, &[0u8; 6], 1, 1, ExtendedColorType::Rgb16).unwrap();
        assert!(matches!(
            load_raster(&p),
            Err(ImageIoError::UnsupportedBitDepth { .. })
        ));
    }

    #[test]
    fn hand_written_black_ppm() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("black.ppm");
        let mut bytes = b"P6\n# written by hand\n16 16\n255\n".to_vec();
        bytes.extend(std::iter::repeat_n(0u8, 768));
        fs::write(&p, bytes).unwrap();
        let img = load_raster(&p).unwrap();
        assert_eq!(img.dims(), (16, 16));
        assert_eq!(img.as_raw().len(), 768);
        assert!(img.as_raw().iter().all(|b| *b == 0));
    }

    #[test]
    fn unknown_extension_and_format() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            save_raster(&sample(), dir.path().join("x.bmp")),
            Err(ImageIoError::UnsupportedFormat(_))
        ));
        let p = dir.path().join("x.txt");
        fs::write(&p, b"hello world").unwrap();
        assert!(matches!(load_raster(&p), Err(ImageIoError::UnsupportedFormat(_))));
    }

    #[test]
    fn mask_round_trip_and_rejection() {
        let dir = tempfile::tempdir().unwrap();
        let mask = VesselMask::from_values(3, 1, vec![0, 1, 1]).unwrap();
        let p = dir.path().join("m.png");
        save_mask(&mask, &p).unwrap();
        assert_eq!(load_mask(&p).unwrap(), mask);
        save_raster(&sample(), &p).unwrap();
        assert!(matches!(load_mask(&p), Err(ImageIoError::NonBinaryMask { .. })));
    }
}
