use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Component, Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{with_jobs, Categorize, ErrorCategory, PipelineError, RunConfig};
use crate::augment::{build_balance_plan, default_target, eligible_members, execute_plan};
use crate::classify::{fit, load_model, predict, read_decisions, read_scores, save_model, write_predictions, write_scores};
use crate::dataset::{init_manifest, load_manifest, save_manifest, Manifest, SampleRecord, Split};
use crate::enhance::batch_enhance;
use crate::evaluate::{evaluate_scores, write_report};
use crate::features::{
    export_feature_table, extract_batch, import_feature_table, read_feature_table, write_feature_table, FeatureTable,
    IMPORTED_DESCRIPTOR,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const LOG_FILE: &str = "log.json";
const MANIFEST_FILE: &str = "manifest.csv";
const PLAN_FILE: &str = "plan.json";
const IMAGES_DIR: &str = "images";

/// Stage directories of a pipeline run, in execution order.
pub const STAGES: [&str; 7] = [
    "01_split",
    "02_enhance",
    "03_augment",
    "04_features",
    "05_train",
    "06_predict",
    "07_evaluate",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    /// Location relative to the log's directory.
    pub path: String,
    pub sha256: String,
}

/// Machine-readable record of one stage execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    pub stage: String,
    pub version: String,
    pub seed: Option<u64>,
    pub params: Value,
    pub inputs: BTreeMap<String, InputDigest>,
    /// Main artifacts, relative to the log's directory.
    pub artifacts: Vec<String>,
    /// Every written file (relative path to SHA-256).
    pub outputs: BTreeMap<String, String>,
    /// Digest of stage, version, seed, parameters and input hashes.
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutcome {
    pub stage: &'static str,
    pub artifacts: Vec<PathBuf>,
    pub log: PathBuf,
    /// True when an up-to-date earlier result was reused.
    pub skipped: bool,
}

/// Log location for a single-file artifact: `<dir>/<stem>.log.json`.
pub fn log_path_for(artifact: &Path) -> PathBuf {
    let stem = artifact.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    artifact.with_file_name(format!("{stem}.log.json"))
}

/// Where `predict` puts hard decisions for a score file: `predictions.csv`
/// beside `scores.csv`, otherwise `<stem>.predictions.csv`.
pub fn predictions_path_for(scores: &Path) -> PathBuf {
    match scores.file_stem().and_then(|s| s.to_str()) {
        Some("scores") => scores.with_file_name("predictions.csv"),
        Some(stem) => scores.with_file_name(format!("{stem}.predictions.csv")),
        None => scores.with_file_name("predictions.csv"),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn hash_file(path: &Path) -> Result<String, PipelineError> {
    let bytes = fs::read(path).map_err(|e| e.into_pipeline(path.display().to_string()))?;
    Ok(sha256_hex(&bytes))
}

fn lexical_absolute(path: &Path) -> PathBuf {
    let abs = std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf());
    let mut out = PathBuf::new();
    for c in abs.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    out.push(c);
                }
            }
            other => out.push(other),
        }
    }
    out
}

/// `path` expressed relative to directory `base`, using `..` where needed.
pub(crate) fn relative_path(path: &Path, base: &Path) -> PathBuf {
    let (p, b) = (lexical_absolute(path), lexical_absolute(base));
    let pc: Vec<Component> = p.components().collect();
    let bc: Vec<Component> = b.components().collect();
    let common = pc.iter().zip(&bc).take_while(|(x, y)| x == y).count();
    if common == 0 {
        return p;
    }
    let mut out = PathBuf::new();
    for _ in common..bc.len() {
        out.push("..");
    }
    for c in &pc[common..] {
        out.push(c);
    }
    if out.as_os_str().is_empty() {
        out.push(".");
    }
    out
}

fn rel_string(path: &Path, base: &Path) -> String {
    relative_path(path, base).to_string_lossy().replace('\\', "/")
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    fs::write(path, text).map_err(|e| e.into_pipeline(path.display().to_string()))
}

fn create_dir(path: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(path).map_err(|e| e.into_pipeline(path.display().to_string()))
}

fn digest(path: &Path, log_dir: &Path) -> Result<InputDigest, PipelineError> {
    Ok(InputDigest {
        path: rel_string(path, log_dir),
        sha256: hash_file(path)?,
    })
}

/// Combined digest of every image and mask a manifest references.
fn manifest_files_digest(m: &Manifest) -> Result<InputDigest, PipelineError> {
    let lines = m
        .records
        .par_iter()
        .map(|r| {
            let image = hash_file(&m.resolve(&r.image))?;
            let mask = match &r.mask {
                Some(p) => hash_file(&m.resolve(p))?,
                None => String::new(),
            };
            Ok(format!("{} {image} {mask}\n", r.id))
        })
        .collect::<Result<Vec<String>, PipelineError>>()?;
    Ok(InputDigest {
        path: "(manifest entries)".into(),
        sha256: sha256_hex(lines.concat().as_bytes()),
    })
}

fn read_manifest(path: &Path) -> Result<Manifest, PipelineError> {
    load_manifest(path, true).map_err(|e| e.into_pipeline(path.display().to_string()))
}

/// Saves `m` at `path` with every file path rewritten relative to the
/// manifest's directory.
fn store_manifest_at(m: &Manifest, path: &Path) -> Result<PathBuf, PipelineError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut out = m.clone();
    for r in &mut out.records {
        r.image = relative_path(&m.resolve(&r.image), dir);
        r.mask = r.mask.as_ref().map(|p| relative_path(&m.resolve(p), dir));
    }
    out.base_dir = dir.to_path_buf();
    save_manifest(&out, path).map_err(|e| e.into_pipeline(path.display().to_string()))?;
    Ok(path.to_path_buf())
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut files = Vec::new();
    if dir.is_dir() {
        for entry in fs::read_dir(dir).map_err(|e| e.into_pipeline(dir.display().to_string()))? {
            let p = entry.map_err(|e| e.into_pipeline(dir.display().to_string()))?.path();
            if p.is_file() {
                files.push(p);
            }
        }
    }
    files.sort();
    Ok(files)
}

struct Prepared {
    stage: &'static str,
    log_path: PathBuf,
    seed: Option<u64>,
    params: Value,
    inputs: BTreeMap<String, InputDigest>,
}

impl Prepared {
    fn new(stage: &'static str, log_path: PathBuf, seed: Option<u64>, params: Value) -> Self {
        Prepared {
            stage,
            log_path,
            seed,
            params,
            inputs: BTreeMap::new(),
        }
    }

    fn log_dir(&self) -> PathBuf {
        self.log_path.parent().unwrap_or(Path::new(".")).to_path_buf()
    }

    fn add(&mut self, role: &str, path: &Path) -> Result<(), PipelineError> {
        let d = digest(path, &self.log_dir())?;
        self.inputs.insert(role.to_string(), d);
        Ok(())
    }

    fn fingerprint(&self) -> String {
        let hashes: BTreeMap<&str, &str> = self.inputs.iter().map(|(k, v)| (k.as_str(), v.sha256.as_str())).collect();
        let doc = json!({
            "stage": self.stage,
            "version": VERSION,
            "seed": self.seed,
            "params": self.params,
            "inputs": hashes,
        });
        sha256_hex(doc.to_string().as_bytes())
    }
}

struct Produced {
    artifacts: Vec<PathBuf>,
    files: Vec<PathBuf>,
}

impl Produced {
    fn single(path: PathBuf) -> Self {
        Produced {
            artifacts: vec![path.clone()],
            files: vec![path],
        }
    }
}

/// Artifacts of an earlier run when its log matches `fingerprint` and every
/// recorded output is unchanged.
fn up_to_date(log_path: &Path, fingerprint: &str) -> Option<Vec<PathBuf>> {
    let log: StageLog = serde_json::from_str(&fs::read_to_string(log_path).ok()?).ok()?;
    if log.fingerprint != fingerprint || log.version != VERSION {
        return None;
    }
    let dir = log_path.parent()?;
    for (rel, sha) in &log.outputs {
        if hash_file(&dir.join(rel)).ok()? != *sha {
            return None;
        }
    }
    Some(log.artifacts.iter().map(|a| dir.join(a)).collect())
}

fn execute(
    prep: Prepared,
    resume: bool,
    clean: Option<&Path>,
    run: impl FnOnce() -> Result<Produced, PipelineError>,
) -> Result<StageOutcome, PipelineError> {
    let fingerprint = prep.fingerprint();
    if resume {
        if let Some(artifacts) = up_to_date(&prep.log_path, &fingerprint) {
            log::info!("{}: up to date", prep.stage);
            return Ok(StageOutcome {
                stage: prep.stage,
                artifacts,
                log: prep.log_path,
                skipped: true,
            });
        }
    }
    if let Some(dir) = clean.filter(|d| d.exists()) {
        fs::remove_dir_all(dir).map_err(|e| e.into_pipeline(dir.display().to_string()).within(prep.stage))?;
    }
    let dir = prep.log_dir();
    create_dir(&dir).map_err(|e| e.within(prep.stage))?;
    let produced = run().map_err(|e| e.within(prep.stage))?;
    let mut outputs = BTreeMap::new();
    for f in &produced.files {
        outputs.insert(rel_string(f, &dir), hash_file(f)?);
    }
    let log = StageLog {
        stage: prep.stage.to_string(),
        version: VERSION.to_string(),
        seed: prep.seed,
        params: prep.params,
        inputs: prep.inputs,
        artifacts: produced.artifacts.iter().map(|a| rel_string(a, &dir)).collect(),
        outputs,
        fingerprint,
    };
    let mut text = serde_json::to_string_pretty(&log).expect("log serialises");
    text.push('\n');
    write_text(&prep.log_path, &text)?;
    Ok(StageOutcome {
        stage: prep.stage,
        artifacts: produced.artifacts,
        log: prep.log_path,
        skipped: false,
    })
}

fn manifest_stage_prep(
    stage: &'static str,
    manifest_path: &Path,
    out_dir: &Path,
    seed: Option<u64>,
    params: Value,
) -> Result<(Manifest, Prepared), PipelineError> {
    let m = read_manifest(manifest_path).map_err(|e| e.within(stage))?;
    let mut prep = Prepared::new(stage, out_dir.join(LOG_FILE), seed, params);
    prep.add("manifest", manifest_path)?;
    prep.inputs.insert("files".into(), manifest_files_digest(&m)?);
    Ok((m, prep))
}

fn split_stage(
    cfg: &RunConfig,
    manifest: &Path,
    out_dir: &Path,
    resume: bool,
    clean: bool,
) -> Result<StageOutcome, PipelineError> {
    let out_dir = &lexical_absolute(out_dir);
    let seed = cfg.split_seed();
    let params = json!({ "ratios": cfg.split_ratios, "seed": seed });
    let (m, prep) = manifest_stage_prep("split", manifest, out_dir, Some(seed), params)?;
    execute(prep, resume, clean.then_some(out_dir), || {
        let split = crate::dataset::stratified_split(&m, cfg.split_ratios, seed).map_err(|e| e.into_pipeline(""))?;
        Ok(Produced::single(store_manifest_at(&split, &out_dir.join(MANIFEST_FILE))?))
    })
}

fn enhance_stage(
    cfg: &RunConfig,
    manifest: &Path,
    out_dir: &Path,
    resume: bool,
    clean: bool,
) -> Result<StageOutcome, PipelineError> {
    let out_dir = &lexical_absolute(out_dir);
    let strategy = cfg.sve_strategy()?;
    let params = json!({ "strategy": strategy });
    let (m, prep) = manifest_stage_prep("enhance", manifest, out_dir, None, params)?;
    execute(prep, resume, clean.then_some(out_dir), || {
        let images = out_dir.join(IMAGES_DIR);
        let outcome = batch_enhance(&m.records, &strategy, &images, |p| m.resolve(p))
            .map_err(|e| e.into_pipeline(images.display().to_string()))?;
        let failed = outcome.errors.len();
        if let Some((id, err)) = outcome.errors.into_iter().next() {
            return Err(PipelineError::new(
                ErrorCategory::Input,
                format!("{failed} of {} samples failed, first {id}", m.records.len()),
                Some(Box::new(err)),
            ));
        }
        let mut out = m.clone();
        out.records = outcome.rows;
        let path = store_manifest_at(&out, &out_dir.join(MANIFEST_FILE))?;
        let mut files = outcome.outputs;
        files.push(path.clone());
        Ok(Produced {
            artifacts: vec![images, path],
            files,
        })
    })
}

fn augment_stage(
    cfg: &RunConfig,
    manifest: &Path,
    out_dir: &Path,
    resume: bool,
    clean: bool,
) -> Result<StageOutcome, PipelineError> {
    let out_dir = &lexical_absolute(out_dir);
    let seed = cfg.augment_seed();
    let params = json!({
        "enabled": cfg.augment,
        "target": cfg.augment_target,
        "splits": cfg.augment_splits,
        "angles": cfg.plan_options(0).angles,
        "noise_std": cfg.augment_noise_std,
        "allow_undershoot": cfg.allow_undershoot,
        "seed": seed,
    });
    let (m, prep) = manifest_stage_prep("augment", manifest, out_dir, Some(seed), params)?;
    execute(prep, resume, clean.then_some(out_dir), || {
        let manifest_out = out_dir.join(MANIFEST_FILE);
        if !cfg.augment {
            return Ok(Produced::single(store_manifest_at(&m, &manifest_out)?));
        }
        let splits: BTreeSet<Split> = cfg.augment_splits.iter().copied().collect();
        let members = eligible_members(&m, &splits);
        let counts: Vec<usize> = members.values().map(Vec::len).collect();
        let target = cfg.augment_target.unwrap_or_else(|| default_target(&counts));
        let plan = build_balance_plan(&members, &cfg.plan_options(target)).map_err(|e| e.into_pipeline("plan"))?;
        let images = out_dir.join(IMAGES_DIR);
        create_dir(&images)?;
        let out = execute_plan(&plan, &m, &images, &splits).map_err(|e| e.into_pipeline("execute plan"))?;
        let plan_path = out_dir.join(PLAN_FILE);
        write_text(&plan_path, &(plan.to_json() + "\n"))?;
        store_manifest_at(&out, &manifest_out)?;
        let mut files = sorted_files(&images)?;
        files.push(plan_path.clone());
        files.push(manifest_out.clone());
        Ok(Produced {
            artifacts: vec![images, plan_path, manifest_out],
            files,
        })
    })
}

fn split_groups(m: &Manifest) -> Vec<(Split, Vec<SampleRecord>)> {
    [Split::Train, Split::Val, Split::Test, Split::Unassigned]
        .into_iter()
        .map(|s| (s, m.in_split(s).cloned().collect::<Vec<_>>()))
        .filter(|(_, rows)| !rows.is_empty())
        .collect()
}

fn select_rows(table: &FeatureTable, records: &[SampleRecord]) -> Result<FeatureTable, PipelineError> {
    let by_id: HashMap<&str, usize> = table.rows.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let mut rows = Vec::with_capacity(records.len());
    for rec in records {
        let Some(i) = by_id.get(rec.id.as_str()) else {
            return Err(PipelineError::new(
                ErrorCategory::Input,
                format!("imported features have no row for sample {}", rec.id),
                None,
            ));
        };
        let row = &table.rows[*i];
        if row.label != rec.label {
            return Err(PipelineError::new(
                ErrorCategory::Input,
                format!("sample {}: imported label {} differs from manifest label {}", rec.id, row.label, rec.label),
                None,
            ));
        }
        rows.push(row.clone());
    }
    FeatureTable::new(IMPORTED_DESCRIPTOR, table.dimension, rows).map_err(|e| e.into_pipeline("imported features"))
}

fn features_stage(
    cfg: &RunConfig,
    manifest: &Path,
    out_dir: &Path,
    resume: bool,
    clean: bool,
) -> Result<StageOutcome, PipelineError> {
    let out_dir = &lexical_absolute(out_dir);
    let descriptor = cfg.descriptor();
    let params = match &cfg.import_features {
        Some(_) => json!({ "import": true }),
        None => json!({
            "descriptor": descriptor,
            "descriptor_id": descriptor.id(),
            "resize": cfg.resize,
        }),
    };
    let (m, mut prep) = manifest_stage_prep("features", manifest, out_dir, None, params)?;
    if let Some(p) = &cfg.import_features {
        prep.add("import", p)?;
    }
    execute(prep, resume, clean.then_some(out_dir), || {
        let imported = match &cfg.import_features {
            Some(p) => Some(import_feature_table(p).map_err(|e| e.into_pipeline(p.display().to_string()))?),
            None => None,
        };
        let mut files = Vec::new();
        for (split, records) in split_groups(&m) {
            let table = match &imported {
                Some(t) => select_rows(t, &records)?,
                None => extract_batch(&records, &descriptor, cfg.resize_dims(), |p| m.resolve(p))
                    .map_err(|e| e.into_pipeline(format!("{split} split")))?,
            };
            let path = out_dir.join(format!("{split}.csv"));
            write_feature_table(&table, &path).map_err(|e| e.into_pipeline(path.display().to_string()))?;
            files.push(path);
        }
        Ok(Produced {
            artifacts: files.clone(),
            files,
        })
    })
}

fn train_stage(cfg: &RunConfig, features: &Path, out: &Path, resume: bool) -> Result<StageOutcome, PipelineError> {
    let out = &lexical_absolute(out);
    let spec = cfg.classifier_spec();
    let params = json!({ "spec": spec, "descriptor_id": cfg.descriptor_id() });
    let mut prep = Prepared::new("train", log_path_for(out), Some(spec.seed), params);
    prep.add("features", features).map_err(|e| e.within("train"))?;
    execute(prep, resume, None, || {
        let table = read_feature_table(features, &cfg.descriptor_id())
            .map_err(|e| e.into_pipeline(features.display().to_string()))?;
        let model = fit(&spec, &table).map_err(|e| e.into_pipeline("fit"))?;
        save_model(&model, out).map_err(|e| e.into_pipeline(out.display().to_string()))?;
        Ok(Produced::single(out.to_path_buf()))
    })
}

fn predict_stage(model_path: &Path, features: &Path, out: &Path, resume: bool) -> Result<StageOutcome, PipelineError> {
    let out = &lexical_absolute(out);
    let mut prep = Prepared::new("predict", log_path_for(out), None, json!({}));
    prep.add("model", model_path).map_err(|e| e.within("predict"))?;
    prep.add("features", features).map_err(|e| e.within("predict"))?;
    execute(prep, resume, None, || {
        let model = load_model(model_path).map_err(|e| e.into_pipeline(model_path.display().to_string()))?;
        let table = read_feature_table(features, &model.descriptor)
            .map_err(|e| e.into_pipeline(features.display().to_string()))?;
        let pred = predict(&model, &table).map_err(|e| e.into_pipeline("predict"))?;
        let decisions = predictions_path_for(out);
        write_scores(&pred.scores, out).map_err(|e| e.into_pipeline(out.display().to_string()))?;
        write_predictions(&pred, &decisions).map_err(|e| e.into_pipeline(decisions.display().to_string()))?;
        Ok(Produced {
            artifacts: vec![out.to_path_buf(), decisions.clone()],
            files: vec![out.to_path_buf(), decisions],
        })
    })
}

fn evaluate_stage(
    scores: &Path,
    predictions: Option<&Path>,
    out_dir: &Path,
    run: BTreeMap<String, String>,
    resume: bool,
    clean: bool,
) -> Result<StageOutcome, PipelineError> {
    let out_dir = &lexical_absolute(out_dir);
    let predictions = predictions.map(Path::to_path_buf).or_else(|| {
        let p = predictions_path_for(scores);
        p.is_file().then_some(p)
    });
    let mut prep = Prepared::new("evaluate", out_dir.join(LOG_FILE), None, json!({ "run": run }));
    prep.add("scores", scores).map_err(|e| e.within("evaluate"))?;
    if let Some(p) = &predictions {
        prep.add("predictions", p).map_err(|e| e.within("evaluate"))?;
    }
    let mut meta = run;
    meta.insert("version".into(), VERSION.into());
    for (role, d) in &prep.inputs {
        meta.insert(format!("{role}_sha256"), d.sha256.clone());
    }
    execute(prep, resume, clean.then_some(out_dir), || {
        let s = read_scores(scores).map_err(|e| e.into_pipeline(scores.display().to_string()))?;
        let d = match &predictions {
            Some(p) => Some(read_decisions(p).map_err(|e| e.into_pipeline(p.display().to_string()))?),
            None => None,
        };
        let (report, curves) = evaluate_scores(&s, d.as_deref(), meta).map_err(|e| e.into_pipeline("metrics"))?;
        let written = write_report(&report, &curves, out_dir).map_err(|e| e.into_pipeline(out_dir.display().to_string()))?;
        Ok(Produced {
            artifacts: written.clone(),
            files: written,
        })
    })
}

/// Assigns train/val/test to every sample of `manifest`; writes
/// `<out_dir>/manifest.csv`.
pub fn cmd_split(cfg: &RunConfig, manifest: &Path, out_dir: &Path) -> Result<StageOutcome, PipelineError> {
    split_stage(cfg, manifest, out_dir, false, false)
}

/// Enhances every sample into `<out_dir>/images` and writes the manifest of
/// enhanced images.
pub fn cmd_enhance(cfg: &RunConfig, manifest: &Path, out_dir: &Path) -> Result<StageOutcome, PipelineError> {
    enhance_stage(cfg, manifest, out_dir, false, false)
}

/// Balances the configured splits; writes derived images, `plan.json` and the
/// extended manifest.
pub fn cmd_augment(cfg: &RunConfig, manifest: &Path, out_dir: &Path) -> Result<StageOutcome, PipelineError> {
    augment_stage(cfg, manifest, out_dir, false, false)
}

/// Writes one feature table per non-empty split (`train.csv`, ...).
pub fn cmd_features(cfg: &RunConfig, manifest: &Path, out_dir: &Path) -> Result<StageOutcome, PipelineError> {
    features_stage(cfg, manifest, out_dir, false, false)
}

/// Validates an externally produced feature table and rewrites it in the
/// canonical format.
pub fn cmd_features_import(csv: &Path, out: &Path) -> Result<StageOutcome, PipelineError> {
    let mut prep = Prepared::new("features-import", log_path_for(out), None, json!({}));
    prep.add("table", csv).map_err(|e| e.within("features-import"))?;
    execute(prep, false, None, || {
        let table = import_feature_table(csv).map_err(|e| e.into_pipeline(csv.display().to_string()))?;
        export_feature_table(&table, out).map_err(|e| e.into_pipeline(out.display().to_string()))?;
        Ok(Produced::single(out.to_path_buf()))
    })
}

pub fn cmd_train(cfg: &RunConfig, features: &Path, out: &Path) -> Result<StageOutcome, PipelineError> {
    train_stage(cfg, features, out, false)
}

/// Writes `out` (scores) and the decisions file from [`predictions_path_for`].
pub fn cmd_predict(model: &Path, features: &Path, out: &Path) -> Result<StageOutcome, PipelineError> {
    predict_stage(model, features, out, false)
}

/// Evaluates a score file. Without an explicit `predictions` file, the
/// decisions file written next to the scores by `predict` is used when it
/// exists, otherwise the row argmax.
pub fn cmd_evaluate(scores: &Path, predictions: Option<&Path>, out_dir: &Path) -> Result<StageOutcome, PipelineError> {
    evaluate_stage(scores, predictions, out_dir, BTreeMap::new(), false, false)
}

/// Builds a manifest from a directory of images and a labels file.
pub fn cmd_manifest_init(
    images: &Path,
    labels: &Path,
    masks: Option<&Path>,
    out: &Path,
) -> Result<StageOutcome, PipelineError> {
    let mut prep = Prepared::new("manifest-init", log_path_for(out), None, json!({ "masks": masks.is_some() }));
    prep.add("labels", labels).map_err(|e| e.within("manifest-init"))?;
    execute(prep, false, None, || {
        let m = init_manifest(images, labels, masks).map_err(|e| e.into_pipeline(""))?;
        Ok(Produced::single(store_manifest_at(&m, out)?))
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Re-run every stage even when its log says it is up to date.
    pub force: bool,
    /// Only compute the stage plan.
    pub dry_run: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedStage {
    pub name: &'static str,
    pub dir: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl fmt::Display for PlannedStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ");
        write!(f, "{}: {} -> {}", self.name, list(&self.inputs), list(&self.outputs))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOutcome {
    pub warnings: Vec<String>,
    pub plan: Vec<PlannedStage>,
    /// Empty for a dry run.
    pub stages: Vec<StageOutcome>,
    pub report: Option<PathBuf>,
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, PipelineError> {
    p.as_deref()
        .ok_or_else(|| PipelineError::usage(format!("`{key}` must be set (config key or flag)")))
}

/// The stages `cmd_pipeline` would run, with their inputs and outputs.
pub fn pipeline_plan(cfg: &RunConfig) -> Result<Vec<PlannedStage>, PipelineError> {
    let manifest = required(&cfg.manifest, "manifest")?;
    let run = required(&cfg.out_dir, "out_dir")?;
    let d: Vec<PathBuf> = STAGES.iter().map(|s| run.join(s)).collect();
    let eval_csv = d[3].join(format!("{}.csv", cfg.eval_split));
    let mut feature_inputs = vec![d[2].join(MANIFEST_FILE)];
    feature_inputs.extend(cfg.import_features.clone());
    let stage = |i: usize, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>| PlannedStage {
        name: STAGES[i],
        dir: d[i].clone(),
        inputs,
        outputs,
    };
    Ok(vec![
        stage(0, vec![manifest.to_path_buf()], vec![d[0].join(MANIFEST_FILE)]),
        stage(
            1,
            vec![d[0].join(MANIFEST_FILE)],
            vec![d[1].join(IMAGES_DIR), d[1].join(MANIFEST_FILE)],
        ),
        stage(
            2,
            vec![d[1].join(MANIFEST_FILE)],
            vec![d[2].join(IMAGES_DIR), d[2].join(PLAN_FILE), d[2].join(MANIFEST_FILE)],
        ),
        stage(
            3,
            feature_inputs,
            ["train", "val", "test"].iter().map(|s| d[3].join(format!("{s}.csv"))).collect(),
        ),
        stage(4, vec![d[3].join("train.csv")], vec![d[4].join("model.json")]),
        stage(
            5,
            vec![d[4].join("model.json"), eval_csv],
            vec![d[5].join("scores.csv"), d[5].join("predictions.csv")],
        ),
        stage(
            6,
            vec![d[5].join("scores.csv"), d[5].join("predictions.csv")],
            vec![d[6].join("report.json"), d[6].join("confusion.csv")],
        ),
    ])
}

fn run_metadata(cfg: &RunConfig) -> Result<BTreeMap<String, String>, PipelineError> {
    let strategy = cfg.sve_strategy()?;
    let mut run = BTreeMap::new();
    run.insert("seed".into(), cfg.seed.to_string());
    run.insert("strategy".into(), strategy.variant.name().to_string());
    if strategy.variant.uses_weight() {
        run.insert("weight".into(), strategy.weight.to_string());
    }
    if strategy.variant.uses_gamma() {
        run.insert("gamma".into(), strategy.gamma.to_string());
    }
    run.insert("augment".into(), cfg.augment.to_string());
    run.insert("descriptor".into(), cfg.descriptor_id());
    run.insert("model".into(), cfg.model.name().to_string());
    run.insert("eval_split".into(), cfg.eval_split.to_string());
    Ok(run)
}

fn require_file(path: &Path, what: &str) -> Result<(), PipelineError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(PipelineError::new(
            ErrorCategory::Input,
            format!("{what} {} does not exist", path.display()),
            None,
        ))
    }
}

/// Runs split, enhance, augment, features, train, predict and evaluate in
/// `cfg.out_dir`. Stages whose logs show identical inputs and parameters are
/// reused unless `options.force` is set.
pub fn cmd_pipeline(cfg: &RunConfig, options: PipelineOptions) -> Result<PipelineOutcome, PipelineError> {
    let warnings = cfg.validate()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let plan = pipeline_plan(cfg)?;
    if options.dry_run {
        return Ok(PipelineOutcome {
            warnings,
            plan,
            stages: Vec::new(),
            report: None,
        });
    }
    let resume = !options.force;
    let manifest = required(&cfg.manifest, "manifest")?;
    require_file(manifest, "manifest")?;
    let d: Vec<&Path> = plan.iter().map(|s| s.dir.as_path()).collect();
    let run = run_metadata(cfg)?;
    let stages = with_jobs(cfg.jobs, || -> Result<Vec<StageOutcome>, PipelineError> {
        let mut done = vec![split_stage(cfg, manifest, d[0], resume, true)?];
        done.push(enhance_stage(cfg, &d[0].join(MANIFEST_FILE), d[1], resume, true)?);
        done.push(augment_stage(cfg, &d[1].join(MANIFEST_FILE), d[2], resume, true)?);
        done.push(features_stage(cfg, &d[2].join(MANIFEST_FILE), d[3], resume, true)?);
        let train_csv = d[3].join("train.csv");
        require_file(&train_csv, "training features").map_err(|e| e.within("train"))?;
        create_dir(d[4])?;
        done.push(train_stage(cfg, &train_csv, &d[4].join("model.json"), resume)?);
        let eval_csv = d[3].join(format!("{}.csv", cfg.eval_split));
        require_file(&eval_csv, "evaluation features").map_err(|e| e.within("predict"))?;
        create_dir(d[5])?;
        let scores = d[5].join("scores.csv");
        done.push(predict_stage(&d[4].join("model.json"), &eval_csv, &scores, resume)?);
        done.push(evaluate_stage(&scores, Some(&d[5].join("predictions.csv")), d[6], run, resume, true)?);
        Ok(done)
    })??;
    let report = Some(d[6].join(crate::evaluate::REPORT_FILE));
    Ok(PipelineOutcome {
        warnings,
        plan,
        stages,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths() {
        assert_eq!(relative_path(Path::new("/a/b/c.png"), Path::new("/a/d")), PathBuf::from("../b/c.png"));
        assert_eq!(relative_path(Path::new("/a/b/c.png"), Path::new("/a/b")), PathBuf::from("c.png"));
        assert_eq!(relative_path(Path::new("/a/./b/../x"), Path::new("/a")), PathBuf::from("x"));
        assert_eq!(relative_path(Path::new("/a"), Path::new("/a")), PathBuf::from("."));
    }

    #[test]
    fn companion_paths() {
        assert_eq!(predictions_path_for(Path::new("o/scores.csv")), PathBuf::from("o/predictions.csv"));
        assert_eq!(predictions_path_for(Path::new("o/knn.csv")), PathBuf::from("o/knn.predictions.csv"));
        assert_eq!(log_path_for(Path::new("o/model.json")), PathBuf::from("o/model.log.json"));
    }

    #[test]
    fn dry_run_plans_without_writing() {
        let dir = tempfile::tempdir().unwrap();
        let run = dir.path().join("run");
        let cfg = RunConfig {
            manifest: Some(dir.path().join("missing.csv")),
            out_dir: Some(run.clone()),
            ..RunConfig::default()
        };
        let out = cmd_pipeline(&cfg, PipelineOptions { force: false, dry_run: true }).unwrap();
        assert_eq!(out.plan.len(), STAGES.len());
        assert!(out.stages.is_empty());
        assert!(!run.exists());
        assert!(out.plan[5].to_string().contains("test.csv"));
    }

    #[test]
    fn missing_manifest_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            manifest: Some(dir.path().join("missing.csv")),
            out_dir: Some(dir.path().join("run")),
            ..RunConfig::default()
        };
        let e = cmd_pipeline(&cfg, PipelineOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = cmd_pipeline(&RunConfig::default(), PipelineOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
