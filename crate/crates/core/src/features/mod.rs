//! Feature extraction and the feature-table interchange format.
//!
//! Feature tables are CSV files with the header `id,label,f0,...,f{n-1}`.
//! Values are written in scientific notation with 17 significant digits, which
//! round-trips every `f64` exactly. Externally computed deep features (for
//! example the pooled activations of an ImageNet backbone) enter the pipeline
//! through [`import_feature_table`].

mod hog;
mod lbp;
mod table;

pub use hog::{hog, HogParams};
pub use lbp::{lbp, lbp_code, transitions, uniform_bin_table, LbpParams, UNIFORM_BINS};
pub use table::{
    export_feature_table, import_feature_table, read_feature_table, standardize, write_feature_table,
    FeatureRow, FeatureTable, Standardizer, IMPORTED_DESCRIPTOR,
};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SampleRecord;
use crate::imaging::{load_raster, to_grayscale, GrayMatrix, ImageIoError, RasterImage};

/// Side of the square raster fed to the descriptors.
pub const DEFAULT_RESIZE: usize = 224;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("invalid descriptor parameters: {0}")]
    InvalidParams(String),
    #[error("image {width}x{height} too small: {detail}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        detail: String,
    },
    #[error("sample {id}: {source}")]
    Image {
        id: String,
        #[source]
        source: ImageIoError,
    },
    #[error("sample {id}: image is {found:?} after resizing, expected {expected:?}")]
    SizeMismatch {
        id: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: line {line}: row has {found} fields, expected {expected}")]
    Ragged {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: line {line}: non-finite value {value:?}")]
    NonFinite {
        path: PathBuf,
        line: usize,
        value: String,
    },
    #[error("{path}: line {line}: label {value} outside 0..=13")]
    LabelRange {
        path: PathBuf,
        line: usize,
        value: String,
    },
    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),
    #[error("feature dimension mismatch: {expected} vs {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite feature value in sample {0}")]
    NonFiniteValue(String),
}

/// Ordered feature values plus the id of the extractor that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub descriptor: String,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, descriptor: String) -> Self {
        FeatureVector { values, descriptor }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A traditional descriptor with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Descriptor {
    Hog(HogParams),
    Lbp(LbpParams),
}

impl Descriptor {
    pub fn id(&self) -> String {
        match self {
            Descriptor::Hog(p) => p.descriptor_id(),
            Descriptor::Lbp(p) => p.descriptor_id(),
        }
    }

    pub fn dimension(&self, width: usize, height: usize) -> Result<usize, FeatureError> {
        match self {
            Descriptor::Hog(p) => p.dimension(width, height),
            Descriptor::Lbp(p) => {
                p.validate()?;
                Ok(p.dimension())
            }
        }
    }

    pub fn extract(&self, gray: &GrayMatrix) -> Result<FeatureVector, FeatureError> {
        match self {
            Descriptor::Hog(p) => hog(gray, p),
            Descriptor::Lbp(p) => lbp(gray, p),
        }
    }
}

/// Resizes (bilinear) to `size` when given, converts to luminance and extracts.
pub fn extract_image(
    img: &RasterImage,
    descriptor: &Descriptor,
    size: Option<(usize, usize)>,
) -> Result<FeatureVector, FeatureError> {
    let resized;
    let img = match size {
        Some((w, h)) if img.dims() != (w, h) => {
            resized = img
                .resize_bilinear(w, h)
                .map_err(|e| FeatureError::InvalidParams(e.to_string()))?;
            &resized
        }
        _ => img,
    };
    descriptor.extract(&to_grayscale(img))
}

/// Extracts one row per record, in record order.
///
/// With `size = None` all images must already share the size of the first one.
pub fn extract_batch(
    records: &[SampleRecord],
    descriptor: &Descriptor,
    size: Option<(usize, usize)>,
    resolve: impl Fn(&Path) -> PathBuf + Sync,
) -> Result<FeatureTable, FeatureError> {
    let declared = match size {
        Some((w, h)) => Some(descriptor.dimension(w, h)?),
        None => None,
    };
    let rows: Vec<(FeatureRow, (usize, usize))> = records
        .par_iter()
        .map(|r| {
            let img = load_raster(resolve(&r.image)).map_err(|source| FeatureError::Image {
                id: r.id.clone(),
                source,
            })?;
            let dims = img.dims();
            let v = extract_image(&img, descriptor, size)?;
            Ok((
                FeatureRow {
                    id: r.id.clone(),
                    label: r.label,
                    values: v.values,
                },
                size.unwrap_or(dims),
            ))
        })
        .collect::<Result<_, FeatureError>>()?;
    if let Some(((_, first), rest)) = rows.split_first() {
        if let Some((row, found)) = rest.iter().find(|(_, d)| d != first) {
            return Err(FeatureError::SizeMismatch {
                id: row.id.clone(),
                expected: *first,
                found: *found,
            });
        }
    }
    let dimension = match (declared, rows.first()) {
        (Some(d), _) => d,
        (None, Some((row, _))) => row.values.len(),
        (None, None) => 0,
    };
    FeatureTable::new(descriptor.id(), dimension, rows.into_iter().map(|(r, _)| r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::save_raster;
    use crate::label::Label;

    #[test]
    fn batch_extraction() {
        let dir = tempfile::tempdir().unwrap();
        let img = RasterImage::from_fn(20, 20, |x, y| [(x * 12) as u8, (y * 9) as u8, 40]).unwrap();
        let mut records = Vec::new();
        for id in ["a", "b"] {
            let p = dir.path().join(format!("{id}.png"));
            save_raster(&img, &p).unwrap();
            records.push(SampleRecord::original(id, p, None, Label::new(3).unwrap()));
        }
        let d = Descriptor::Lbp(LbpParams::default());
        let t = extract_batch(&records, &d, Some((32, 32)), |p| p.to_path_buf()).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].values, t.rows[1].values);
        assert_eq!(t.dimension, 59);

        let empty = extract_batch(&[], &Descriptor::Hog(HogParams::default()), Some((224, 224)), |p| {
            p.to_path_buf()
        })
        .unwrap();
        assert!(empty.rows.is_empty());
        assert_eq!(empty.dimension, 26244);

        let other = RasterImage::filled(10, 10, [1, 2, 3]).unwrap();
        let p = dir.path().join("c.png");
        save_raster(&other, &p).unwrap();
        records.push(SampleRecord::original("c", p, None, Label::new(3).unwrap()));
        assert!(matches!(
            extract_batch(&records, &d, None, |p| p.to_path_buf()),
            Err(FeatureError::SizeMismatch { .. })
        ));
        records.push(SampleRecord::original("d", dir.path().join("none.png"), None, Label::new(3).unwrap()));
        assert!(matches!(
            extract_batch(&records, &d, Some((32, 32)), |p| p.to_path_buf()),
            Err(FeatureError::Image { .. })
        ));
    }
}
