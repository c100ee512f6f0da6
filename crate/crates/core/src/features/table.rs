use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::label::Label;

/// Descriptor id given to tables read without one.
pub const IMPORTED_DESCRIPTOR: &str = "imported";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    pub label: Label,
    pub values: Vec<f64>,
}

/// Labelled feature vectors sharing one descriptor and dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub descriptor: String,
    pub dimension: usize,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    /// Validates dimensions, finiteness and id uniqueness.
    pub fn new(descriptor: impl Into<String>, dimension: usize, rows: Vec<FeatureRow>) -> Result<Self, FeatureError> {
        let mut ids = HashSet::new();
        for r in &rows {
            if r.values.len() != dimension {
                return Err(FeatureError::DimensionMismatch {
                    expected: dimension,
                    found: r.values.len(),
                });
            }
            if r.values.iter().any(|v| !v.is_finite()) {
                return Err(FeatureError::NonFiniteValue(r.id.clone()));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(FeatureError::DuplicateId(r.id.clone()));
            }
        }
        Ok(FeatureTable {
            descriptor: descriptor.into(),
            dimension,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,label");
        for k in 0..self.dimension {
            write!(out, ",f{k}").expect("write to string");
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{}", r.id, r.label).expect("write to string");
            for v in &r.values {
                write!(out, ",{v:.16e}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    /// Parses CSV text; `path` is only used in error messages.
    pub fn from_csv(text: &str, descriptor: &str, path: &Path) -> Result<Self, FeatureError> {
        let err_path = path.to_path_buf();
        let parse_err = |line: usize, message: String| FeatureError::Parse {
            path: err_path.clone(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let columns: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
        if columns.len() < 2 || columns[0] != "id" || columns[1] != "label" {
            return Err(parse_err(1, format!("header must start with `id,label`, got {header:?}")));
        }
        for (k, c) in columns[2..].iter().enumerate() {
            if *c != format!("f{k}") {
                return Err(parse_err(1, format!("expected column f{k}, got {c:?}")));
            }
        }
        let dimension = columns.len() - 2;
        let mut rows = Vec::new();
        let mut ids = HashSet::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
            if fields.len() != columns.len() {
                return Err(FeatureError::Ragged {
                    path: path.to_path_buf(),
                    line: line_no,
                    expected: columns.len(),
                    found: fields.len(),
                });
            }
            let id = fields[0].trim().to_string();
            if id.is_empty() {
                return Err(parse_err(line_no, "empty id".into()));
            }
            let label_text = fields[1].trim();
            let label = label_text
                .parse::<i64>()
                .map_err(|_| parse_err(line_no, format!("bad label {label_text:?}")))
                .and_then(|v| {
                    Label::new(v).map_err(|_| FeatureError::LabelRange {
                        path: path.to_path_buf(),
                        line: line_no,
                        value: label_text.to_string(),
                    })
                })?;
            let mut values = Vec::with_capacity(dimension);
            for f in &fields[2..] {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad number {f:?}")))?;
                if !v.is_finite() {
                    return Err(FeatureError::NonFinite {
                        path: path.to_path_buf(),
                        line: line_no,
                        value: f.to_string(),
                    });
                }
                values.push(v);
            }
            if !ids.insert(id.clone()) {
                return Err(FeatureError::DuplicateId(id));
            }
            rows.push(FeatureRow { id, label, values });
        }
        FeatureTable::new(descriptor, dimension, rows)
    }
}

pub fn write_feature_table(table: &FeatureTable, path: impl AsRef<Path>) -> Result<(), FeatureError> {
    let path = path.as_ref();
    fs::write(path, table.to_csv()).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a table and tags it with `descriptor`.
pub fn read_feature_table(path: impl AsRef<Path>, descriptor: &str) -> Result<FeatureTable, FeatureError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    FeatureTable::from_csv(&text, descriptor, path)
}

/// Reads an externally produced table (descriptor id [`IMPORTED_DESCRIPTOR`]).
pub fn import_feature_table(path: impl AsRef<Path>) -> Result<FeatureTable, FeatureError> {
    read_feature_table(path, IMPORTED_DESCRIPTOR)
}

pub fn export_feature_table(table: &FeatureTable, path: impl AsRef<Path>) -> Result<(), FeatureError> {
    write_feature_table(table, path)
}

/// Per-feature training mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub descriptor: String,
    #[serde(with = "crate::numfmt::vec")]
    pub mean: Vec<f64>,
    #[serde(with = "crate::numfmt::vec")]
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &FeatureTable) -> Self {
        let d = train.dimension;
        let n = train.rows.len() as f64;
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        if !train.rows.is_empty() {
            for r in &train.rows {
                for (m, v) in mean.iter_mut().zip(&r.values) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n);
            for r in &train.rows {
                for ((s, m), v) in std.iter_mut().zip(&mean).zip(&r.values) {
                    *s += (v - m) * (v - m);
                }
            }
            std.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        }
        Standardizer {
            descriptor: train.descriptor.clone(),
            mean,
            std,
        }
    }

    /// Zero-variance features pass through unchanged.
    pub fn transform(&self, table: &FeatureTable) -> Result<FeatureTable, FeatureError> {
        if table.dimension != self.mean.len() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.mean.len(),
                found: table.dimension,
            });
        }
        let rows = table
            .rows
            .iter()
            .map(|r| FeatureRow {
                id: r.id.clone(),
                label: r.label,
                values: r
                    .values
                    .iter()
                    .zip(self.mean.iter().zip(&self.std))
                    .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { *v })
                    .collect(),
            })
            .collect();
        FeatureTable::new(table.descriptor.clone(), table.dimension, rows)
    }
}

/// Fits on `train` and applies the same transform to `train` and `others`.
pub fn standardize(
    train: &FeatureTable,
    others: &[&FeatureTable],
) -> Result<(FeatureTable, Vec<FeatureTable>, Standardizer), FeatureError> {
    let stats = Standardizer::fit(train);
    let train_out = stats.transform(train)?;
    let others_out = others
        .iter()
        .map(|t| stats.transform(t))
        .collect::<Result<_, _>>()?;
    Ok((train_out, others_out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(id: &str, label: i64, values: &[f64]) -> FeatureRow {
        FeatureRow {
            id: id.into(),
            label: Label::new(label).unwrap(),
            values: values.to_vec(),
        }
    }

    fn parse(text: &str) -> Result<FeatureTable, FeatureError> {
        FeatureTable::from_csv(text, IMPORTED_DESCRIPTOR, Path::new("t.csv"))
    }

    #[test]
    fn header_and_number_format() {
        let t = FeatureTable::new("x", 2, vec![row("a", 3, &[0.1, -2.5])]).unwrap();
        assert_eq!(
            t.to_csv(),
            "id,label,f0,f1\na,3,1.0000000000000001e-1,-2.5000000000000000e0\n"
        );
    }

    #[test]
    fn import_errors() {
        assert!(matches!(parse("id,label,f0\na,14,1.0\n"), Err(FeatureError::LabelRange { line: 2, .. })));
        assert!(matches!(parse("id,label,f0\na,1,NaN\n"), Err(FeatureError::NonFinite { .. })));
        assert!(matches!(parse("id,label,f0\na,1,inf\n"), Err(FeatureError::NonFinite { .. })));
        assert!(matches!(parse("id,label,f0,f1\na,1,1.0\n"), Err(FeatureError::Ragged { .. })));
        assert!(matches!(
            parse("id,label,f0\na,1,1.0\na,2,3.0\n"),
            Err(FeatureError::DuplicateId(_))
        ));
        assert!(matches!(parse("id,lbl,f0\n"), Err(FeatureError::Parse { .. })));
        assert!(matches!(parse("id,label,f1\n"), Err(FeatureError::Parse { .. })));
        let empty = parse("id,label\n").unwrap();
        assert_eq!(empty.dimension, 0);
        assert!(empty.rows.is_empty());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let t = FeatureTable::new(IMPORTED_DESCRIPTOR, 3, vec![
            row("a", 0, &[1.0 / 3.0, 1e-300, -7.25e12]),
            row("b", 13, &[0.0, -0.0, f64::MAX]),
        ])
        .unwrap();
        export_feature_table(&t, &p).unwrap();
        assert_eq!(import_feature_table(&p).unwrap(), t);
    }

    #[test]
    fn zscore_examples() {
        // Column 0: mean 10, std 2. Column 1: constant.
        let train = FeatureTable::new("d", 2, vec![
            row("a", 0, &[8.0, 5.0]),
            row("b", 1, &[12.0, 5.0]),
        ])
        .unwrap();
        let test = FeatureTable::new("d", 2, vec![row("c", 0, &[14.0, 9.0])]).unwrap();
        let (tr, others, stats) = standardize(&train, &[&test]).unwrap();
        assert_eq!(stats.mean, vec![10.0, 5.0]);
        assert_eq!(stats.std, vec![2.0, 0.0]);
        assert_eq!(others[0].rows[0].values, vec![2.0, 9.0]);
        assert_eq!(tr.rows[0].values, vec![-1.0, 5.0]);

        let wrong = FeatureTable::new("d", 1, vec![row("z", 0, &[1.0])]).unwrap();
        assert!(matches!(
            standardize(&train, &[&wrong]),
            Err(FeatureError::DimensionMismatch { .. })
        ));
    }

    fn table_strategy() -> impl Strategy<Value = FeatureTable> {
        (1usize..6, 2usize..20).prop_flat_map(|(d, n)| {
            proptest::collection::vec(
                (0i64..14, proptest::collection::vec(-1e6f64..1e6, d)),
                n,
            )
            .prop_map(move |rows| {
                let rows = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, (l, v))| row(&format!("s{i}"), l, &v))
                    .collect();
                FeatureTable::new(IMPORTED_DESCRIPTOR, d, rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip(t in table_strategy()) {
            let back = FeatureTable::from_csv(&t.to_csv(), IMPORTED_DESCRIPTOR, Path::new("x")).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn standardized_moments(t in table_strategy()) {
            let (out, _, stats) = standardize(&t, &[]).unwrap();
            let n = out.rows.len() as f64;
            for k in 0..out.dimension {
                if stats.std[k] == 0.0 {
                    continue;
                }
                let mean = out.rows.iter().map(|r| r.values[k]).sum::<f64>() / n;
                let var = out.rows.iter().map(|r| (r.values[k] - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
            }
        }
    }
}
