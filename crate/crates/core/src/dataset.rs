//! Manifest model and the stratified train / validation / test split.
//!
//! A manifest is a CSV file with the header `id,image,mask,label,split,provenance`.
//! Relative image and mask paths are resolved against the manifest's directory.
//! The provenance column is either `original` or
//! `augmented;sources=<id>+<id>;ops=<op>><op>;seed=<u64>`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{Label, LabelError, CLASS_NAMES};
use crate::seed;

pub const MANIFEST_HEADER: [&str; 6] = ["id", "image", "mask", "label", "split", "provenance"];
pub const DEFAULT_RATIOS: [f64; 3] = [0.6, 0.2, 0.2];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("bad manifest header {found:?}, expected {expected:?}")]
    Header { found: Vec<String>, expected: Vec<String> },
    #[error("line {line}: {source}")]
    Label {
        line: usize,
        #[source]
        source: LabelError,
    },
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),
    #[error("invalid sample id {0:?} (allowed: ASCII letters, digits, '_', '-', '.')")]
    InvalidId(String),
    #[error("sample {id}: file {path} does not exist")]
    MissingFile { id: String, path: PathBuf },
    #[error("split ratios must be positive and sum to 1, got {0:?}")]
    InvalidRatios([f64; 3]),
    #[error("{0} record(s) have no split assigned")]
    Unassigned(usize),
    #[error("labels file {path}: {message}")]
    LabelsFile { path: PathBuf, message: String },
}

impl DatasetError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    Unassigned,
}

impl Split {
    pub const ASSIGNED: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "val" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            "" | "unassigned" => Ok(Split::Unassigned),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Original,
    Augmented {
        sources: Vec<String>,
        ops: Vec<String>,
        seed: u64,
    },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Original => f.write_str("original"),
            Provenance::Augmented { sources, ops, seed } => write!(
                f,
                "augmented;sources={};ops={};seed={seed}",
                sources.join("+"),
                ops.join(">")
            ),
        }
    }
}

impl FromStr for Provenance {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "original" || s.is_empty() {
            return Ok(Provenance::Original);
        }
        let rest = s
            .strip_prefix("augmented;")
            .ok_or_else(|| format!("unknown provenance {s:?}"))?;
        let mut sources = None;
        let mut ops = None;
        let mut seed = None;
        for part in rest.split(';') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("provenance field {part:?} has no '='"))?;
            match key {
                "sources" => sources = Some(value.split('+').map(str::to_string).collect::<Vec<_>>()),
                "ops" => ops = Some(value.split('>').map(str::to_string).collect()),
                "seed" => {
                    seed = Some(value.parse().map_err(|_| format!("bad provenance seed {value:?}"))?)
                }
                _ => return Err(format!("unknown provenance field {key:?}")),
            }
        }
        let sources = sources.ok_or("augmented provenance without sources")?;
        if sources.is_empty() || sources.iter().any(String::is_empty) {
            return Err("augmented provenance with empty source list".into());
        }
        Ok(Provenance::Augmented {
            sources,
            ops: ops.ok_or("augmented provenance without ops")?,
            seed: seed.ok_or("augmented provenance without seed")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleRecord {
    pub id: String,
    pub image: PathBuf,
    pub mask: Option<PathBuf>,
    pub label: Label,
    pub split: Split,
    pub provenance: Provenance,
}

impl SampleRecord {
    pub fn original(id: impl Into<String>, image: impl Into<PathBuf>, mask: Option<PathBuf>, label: Label) -> Self {
        SampleRecord {
            id: id.into(),
            image: image.into(),
            mask,
            label,
            split: Split::Unassigned,
            provenance: Provenance::Original,
        }
    }
}

/// Ids end up in file names and in the provenance column.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.'))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub name: String,
    pub records: Vec<SampleRecord>,
    /// Directory that relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn new(name: impl Into<String>, base_dir: impl Into<PathBuf>) -> Self {
        Manifest {
            name: name.into(),
            records: Vec::new(),
            base_dir: base_dir.into(),
        }
    }

    pub fn class_names(&self) -> BTreeMap<Label, &'static str> {
        Label::all().map(|l| (l, CLASS_NAMES[l.index()])).collect()
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn get(&self, id: &str) -> Option<&SampleRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn in_split(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    /// Checks id syntax and uniqueness.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !valid_id(&r.id) {
                return Err(DatasetError::InvalidId(r.id.clone()));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(DatasetError::DuplicateId(r.id.clone()));
            }
        }
        Ok(())
    }

    pub fn check_files(&self) -> Result<(), DatasetError> {
        for r in &self.records {
            for p in std::iter::once(&r.image).chain(r.mask.as_ref()) {
                let resolved = self.resolve(p);
                if !resolved.is_file() {
                    return Err(DatasetError::MissingFile {
                        id: r.id.clone(),
                        path: resolved,
                    });
                }
            }
        }
        Ok(())
    }

    /// Rewrites paths under `dir` as relative to it, for a manifest stored there.
    pub fn relativize_to(&mut self, dir: &Path) {
        let rel = |p: &Path| p.strip_prefix(dir).map(Path::to_path_buf).unwrap_or_else(|_| p.to_path_buf());
        for r in &mut self.records {
            let image = self.base_dir.join(&r.image);
            r.image = rel(&image);
            if let Some(m) = &r.mask {
                r.mask = Some(rel(&self.base_dir.join(m)));
            }
        }
        self.base_dir = dir.to_path_buf();
    }
}

/// Loads and validates a manifest. With `check_files`, every referenced image
/// and mask must exist.
pub fn load_manifest(path: impl AsRef<Path>, check_files: bool) -> Result<Manifest, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("manifest")
        .to_string();
    let mut manifest = parse_manifest(&text, path)?;
    manifest.name = name;
    manifest.base_dir = base_dir;
    if check_files {
        manifest.check_files()?;
    }
    Ok(manifest)
}

fn parse_manifest(text: &str, path: &Path) -> Result<Manifest, DatasetError> {
    let csv_err = |source| DatasetError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != MANIFEST_HEADER {
        return Err(DatasetError::Header {
            found: header,
            expected: MANIFEST_HEADER.iter().map(|s| s.to_string()).collect(),
        });
    }
    let mut manifest = Manifest::new("", "");
    for (k, row) in reader.records().enumerate() {
        let line = k + 2;
        let row = row.map_err(csv_err)?;
        let field = |i: usize| row.get(i).unwrap_or("").trim();
        let label = field(3)
            .parse::<Label>()
            .map_err(|source| DatasetError::Label { line, source })?;
        let split = field(4)
            .parse::<Split>()
            .map_err(|message| DatasetError::Row { line, message })?;
        let provenance = field(5)
            .parse::<Provenance>()
            .map_err(|message| DatasetError::Row { line, message })?;
        if field(1).is_empty() {
            return Err(DatasetError::Row {
                line,
                message: "empty image path".into(),
            });
        }
        manifest.records.push(SampleRecord {
            id: field(0).to_string(),
            image: PathBuf::from(field(1)),
            mask: Some(field(2)).filter(|m| !m.is_empty()).map(PathBuf::from),
            label,
            split,
            provenance,
        });
    }
    manifest.validate()?;
    Ok(manifest)
}

pub fn manifest_to_csv(manifest: &Manifest) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(MANIFEST_HEADER).expect("in-memory write");
    for r in &manifest.records {
        writer
            .write_record([
                r.id.as_str(),
                &r.image.to_string_lossy(),
                &r.mask.as_ref().map(|m| m.to_string_lossy().into_owned()).unwrap_or_default(),
                &r.label.to_string(),
                r.split.name(),
                &r.provenance.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("flush to vec")).expect("utf-8 csv")
}

pub fn save_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    manifest.validate()?;
    fs::write(path, manifest_to_csv(manifest)).map_err(|e| DatasetError::io(path, e))
}

/// Per-class sizes for `n` samples under `ratios`, by largest remainder with
/// ties going to the earlier split. Classes with at least three samples always
/// keep one training sample.
pub fn split_sizes(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let quotas = ratios.map(|r| n as f64 * r);
    let mut sizes = quotas.map(|q| q.floor() as usize);
    let mut remaining = n - sizes.iter().sum::<usize>().min(n);
    let mut order = [0usize, 1, 2];
    // Stable sort keeps the earlier split first among equal remainders.
    order.sort_by(|a, b| {
        let ra = quotas[*a] - quotas[*a].floor();
        let rb = quotas[*b] - quotas[*b].floor();
        rb.partial_cmp(&ra).expect("finite quotas")
    });
    for idx in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        sizes[*idx] += 1;
        remaining -= 1;
    }
    if n >= 3 && sizes[0] == 0 {
        let donor = if sizes[1] >= sizes[2] { 1 } else { 2 };
        sizes[donor] -= 1;
        sizes[0] += 1;
    }
    sizes
}

fn validate_ratios(ratios: [f64; 3]) -> Result<(), DatasetError> {
    let ok = ratios.iter().all(|r| r.is_finite() && *r > 0.0)
        && (ratios.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
    if ok {
        Ok(())
    } else {
        Err(DatasetError::InvalidRatios(ratios))
    }
}

/// Assigns train / val / test per class.
///
/// Within a class, members are ordered by id, shuffled with a seed derived from
/// `(seed, label)`, then cut into contiguous blocks sized by [`split_sizes`].
/// The result does not depend on manifest row order.
pub fn stratified_split(manifest: &Manifest, ratios: [f64; 3], seed: u64) -> Result<Manifest, DatasetError> {
    validate_ratios(ratios)?;
    let mut by_class: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, r) in manifest.records.iter().enumerate() {
        by_class.entry(r.label).or_default().push(i);
    }
    let mut out = manifest.clone();
    for (label, mut members) in by_class {
        members.sort_by(|a, b| manifest.records[*a].id.cmp(&manifest.records[*b].id));
        let mut rng = seed::rng(seed::mix(seed, &format!("split-class-{label}")));
        members.shuffle(&mut rng);
        let [train, val, _] = split_sizes(members.len(), ratios);
        for (pos, idx) in members.into_iter().enumerate() {
            out.records[idx].split = if pos < train {
                Split::Train
            } else if pos < train + val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(out)
}

/// Per-split, per-class sample counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distribution {
    pub counts: BTreeMap<Split, BTreeMap<Label, usize>>,
}

impl Distribution {
    pub fn count(&self, split: Split, label: Label) -> usize {
        self.counts
            .get(&split)
            .and_then(|m| m.get(&label))
            .copied()
            .unwrap_or(0)
    }

    pub fn split_total(&self, split: Split) -> usize {
        self.counts.get(&split).map(|m| m.values().sum()).unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().flat_map(|m| m.values()).sum()
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.counts.values().flat_map(|m| m.keys().copied()).collect()
    }
}

pub fn summarize_distribution(manifest: &Manifest) -> Result<Distribution, DatasetError> {
    let unassigned = manifest
        .records
        .iter()
        .filter(|r| r.split == Split::Unassigned)
        .count();
    if unassigned > 0 {
        return Err(DatasetError::Unassigned(unassigned));
    }
    let mut counts: BTreeMap<Split, BTreeMap<Label, usize>> = BTreeMap::new();
    for r in &manifest.records {
        *counts.entry(r.split).or_default().entry(r.label).or_default() += 1;
    }
    Ok(Distribution { counts })
}

const IMAGE_EXTENSIONS: [&str; 2] = ["png", "ppm"];

/// Builds a manifest from a directory of images and a labels file.
///
/// The labels file has one `<image stem> <label>` pair per line; blank lines
/// and `#` comments are ignored. When `masks_dir` is given, a mask with the same
/// stem (PNG or PPM) is attached if present. Images without a label line are
/// skipped; label lines without an image are an error.
pub fn init_manifest(
    images_dir: &Path,
    labels_file: &Path,
    masks_dir: Option<&Path>,
) -> Result<Manifest, DatasetError> {
    let text = fs::read_to_string(labels_file).map_err(|e| DatasetError::io(labels_file, e))?;
    let labels_err = |message: String| DatasetError::LabelsFile {
        path: labels_file.to_path_buf(),
        message,
    };
    let mut labels = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(stem), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(labels_err(format!("line {}: expected `<stem> <label>`", k + 1)));
        };
        let label: Label = label
            .parse()
            .map_err(|e: LabelError| labels_err(format!("line {}: {e}", k + 1)))?;
        if labels.insert(stem.to_string(), label).is_some() {
            return Err(labels_err(format!("line {}: duplicate stem {stem:?}", k + 1)));
        }
    }
    let find = |dir: &Path, stem: &str| {
        IMAGE_EXTENSIONS
            .iter()
            .map(|ext| dir.join(format!("{stem}.{ext}")))
            .find(|p| p.is_file())
    };
    let mut manifest = Manifest::new(
        images_dir
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("dataset"),
        "",
    );
    for (stem, label) in labels {
        let image = find(images_dir, &stem).ok_or_else(|| DatasetError::MissingFile {
            id: stem.clone(),
            path: images_dir.join(format!("{stem}.png")),
        })?;
        let mask = masks_dir.and_then(|d| find(d, &stem));
        manifest.records.push(SampleRecord::original(stem, image, mask, label));
    }
    manifest.validate()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lbl(v: i64) -> Label {
        Label::new(v).unwrap()
    }

    fn toy(counts: &[(i64, usize)]) -> Manifest {
        let mut m = Manifest::new("toy", "");
        for (label, n) in counts {
            for k in 0..*n {
                m.records.push(SampleRecord::original(
                    format!("c{label}_{k:03}"),
                    format!("img/c{label}_{k}.png"),
                    None,
                    lbl(*label),
                ));
            }
        }
        m
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = toy(&[(0, 2), (13, 1)]);
        m.records[0].mask = Some("masks/a.png".into());
        m.records[1].split = Split::Test;
        m.records[2].provenance = Provenance::Augmented {
            sources: vec!["c0_000".into(), "c0_001".into()],
            ops: vec!["rotate(15)".into(), "noise(0,10)".into()],
            seed: 99,
        };
        let path = dir.path().join("m.csv");
        save_manifest(&m, &path).unwrap();
        let back = load_manifest(&path, false).unwrap();
        assert_eq!(back.records, m.records);
        assert_eq!(back.name, "m");
        assert_eq!(back.class_names().len(), 14);
    }

    #[test]
    fn rejects_label_14_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "id,image,mask,label,split,provenance\na,a.png,,14,train,original\n").unwrap();
        assert!(matches!(
            load_manifest(&path, false),
            Err(DatasetError::Label {
                line: 2,
                source: LabelError::OutOfRange(14)
            })
        ));
        fs::write(
            &path,
            "id,image,mask,label,split,provenance\na,a.png,,1,,original\na,b.png,,1,,original\n",
        )
        .unwrap();
        assert!(matches!(load_manifest(&path, false), Err(DatasetError::DuplicateId(_))));
    }

    #[test]
    fn empty_manifest_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "id,image,mask,label,split,provenance\n").unwrap();
        assert!(load_manifest(&path, true).unwrap().records.is_empty());
        fs::write(&path, "id,image,mask,label,split,provenance\na,nope.png,,1,,original\n").unwrap();
        assert!(load_manifest(&path, false).is_ok());
        assert!(matches!(load_manifest(&path, true), Err(DatasetError::MissingFile { .. })));
    }

    #[test]
    fn largest_remainder_sizes() {
        assert_eq!(split_sizes(10, DEFAULT_RATIOS), [6, 2, 2]);
        assert_eq!(split_sizes(6, DEFAULT_RATIOS), [4, 1, 1]);
        assert_eq!(split_sizes(3, DEFAULT_RATIOS), [2, 1, 0]);
        assert_eq!(split_sizes(1, DEFAULT_RATIOS), [1, 0, 0]);
        assert_eq!(split_sizes(0, DEFAULT_RATIOS), [0, 0, 0]);
        assert_eq!(split_sizes(3, [0.1, 0.45, 0.45])[0], 1);
    }

    #[test]
    fn split_partitions_and_is_stratified() {
        let m = toy(&[(0, 39), (1, 6), (7, 57), (13, 10)]);
        let s = stratified_split(&m, DEFAULT_RATIOS, 7).unwrap();
        let d = summarize_distribution(&s).unwrap();
        assert_eq!(d.total(), m.records.len());
        assert_eq!(
            [Split::Train, Split::Val, Split::Test].map(|sp| d.count(sp, lbl(1))),
            [4, 1, 1]
        );
        assert_eq!(
            [Split::Train, Split::Val, Split::Test].map(|sp| d.count(sp, lbl(13))),
            [6, 2, 2]
        );
        for (label, n) in [(0, 39usize), (7, 57)] {
            let exact = DEFAULT_RATIOS.map(|r| r * n as f64);
            for (k, sp) in Split::ASSIGNED.iter().enumerate() {
                assert!((d.count(*sp, lbl(label)) as f64 - exact[k]).abs() <= 1.0);
            }
        }
        // Same seed, shuffled row order: identical assignment per id.
        let mut reversed = m.clone();
        reversed.records.reverse();
        let s2 = stratified_split(&reversed, DEFAULT_RATIOS, 7).unwrap();
        for r in &s.records {
            assert_eq!(s2.get(&r.id).unwrap().split, r.split);
        }
        let s3 = stratified_split(&m, DEFAULT_RATIOS, 8).unwrap();
        assert_ne!(s3.records, s.records);
    }

    #[test]
    fn invalid_ratios() {
        let m = toy(&[(0, 3)]);
        assert!(stratified_split(&m, [0.5, 0.2, 0.2], 1).is_err());
        assert!(stratified_split(&m, [1.0, 0.0, 0.0], 1).is_err());
    }

    #[test]
    fn distribution_requires_assignment_and_ignores_order() {
        let m = toy(&[(0, 4)]);
        assert!(matches!(summarize_distribution(&m), Err(DatasetError::Unassigned(4))));
        let s = stratified_split(&toy(&[(0, 9), (2, 5)]), DEFAULT_RATIOS, 3).unwrap();
        let mut rev = s.clone();
        rev.records.reverse();
        assert_eq!(summarize_distribution(&s).unwrap(), summarize_distribution(&rev).unwrap());
    }

    #[test]
    fn provenance_parse_errors() {
        assert!("augmented;sources=;ops=x;seed=1".parse::<Provenance>().is_err());
        assert!("augmented;ops=x;seed=1".parse::<Provenance>().is_err());
        assert!("copied".parse::<Provenance>().is_err());
    }

    #[test]
    fn init_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("images");
        let masks = dir.path().join("masks");
        fs::create_dir_all(&images).unwrap();
        fs::create_dir_all(&masks).unwrap();
        for stem in ["im0001", "im0002", "im0003"] {
            fs::write(images.join(format!("{stem}.ppm")), b"P6 1 1 255\n\0\0\0").unwrap();
        }
        fs::write(masks.join("im0001.png"), b"x").unwrap();
        let labels = dir.path().join("labels.txt");
        fs::write(&labels, "# stem label\nim0001 0\nim0002 13\n").unwrap();
        let m = init_manifest(&images, &labels, Some(&masks)).unwrap();
        assert_eq!(m.records.len(), 2);
        assert!(m.records[0].mask.is_some());
        assert!(m.records[1].mask.is_none());
        fs::write(&labels, "im0009 1\n").unwrap();
        assert!(init_manifest(&images, &labels, None).is_err());
        fs::write(&labels, "im0001 14\n").unwrap();
        assert!(init_manifest(&images, &labels, None).is_err());
    }
}
