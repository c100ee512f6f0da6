use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::PipelineError;
use crate::augment::{default_angle_cycle, PlanOptions, DEFAULT_NOISE_STD};
use crate::classify::{ClassifierKind, ClassifierSpec};
use crate::dataset::{Split, DEFAULT_RATIOS};
use crate::enhance::{SveStrategy, SveVariant, DEFAULT_GAMMA, DEFAULT_WEIGHT};
use crate::features::{Descriptor, HogParams, LbpParams, DEFAULT_RESIZE, IMPORTED_DESCRIPTOR};

/// Config keys holding paths; relative values in a config file are resolved
/// against the file's directory.
const PATH_KEYS: [&str; 3] = ["manifest", "out_dir", "import_features"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    Hog,
    Lbp,
}

/// Every knob of every stage in one flat document.
///
/// Unset stage seeds fall back to `seed`. Unset `weight`, `gamma`,
/// `learning_rate` and `l2` take the module defaults for the chosen strategy
/// or model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,

    pub split_ratios: [f64; 3],
    pub split_seed: Option<u64>,

    pub strategy: SveVariant,
    pub weight: Option<f64>,
    pub gamma: Option<f64>,

    pub augment: bool,
    pub augment_target: Option<usize>,
    pub augment_seed: Option<u64>,
    pub augment_angles: Option<Vec<f64>>,
    pub augment_noise_std: f64,
    pub augment_splits: Vec<Split>,
    pub allow_undershoot: bool,

    pub descriptor: DescriptorKind,
    /// Square side images are resized to before extraction; 0 keeps the
    /// native size.
    pub resize: usize,
    pub lbp_radius: usize,
    pub lbp_uniform: bool,
    pub hog_cell_size: usize,
    pub hog_block_size: usize,
    pub hog_block_stride: usize,
    pub hog_bins: usize,
    pub hog_signed: bool,
    pub hog_clip: f64,
    /// Externally produced feature table used instead of extraction.
    pub import_features: Option<PathBuf>,

    pub model: ClassifierKind,
    pub model_seed: Option<u64>,
    pub standardize: bool,
    pub k: usize,
    pub hidden: usize,
    pub learning_rate: Option<f64>,
    pub epochs: usize,
    pub l2: Option<f64>,
    pub plateau_tol: f64,
    pub plateau_patience: usize,
    pub batch_size: Option<usize>,
    pub ridge: f64,

    pub eval_split: Split,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lbp = LbpParams::default();
        let hog = HogParams::default();
        let spec = ClassifierSpec::new(ClassifierKind::Knn);
        RunConfig {
            manifest: None,
            out_dir: None,
            seed: 0,
            split_ratios: DEFAULT_RATIOS,
            split_seed: None,
            strategy: SveVariant::WeightedBackground,
            weight: None,
            gamma: None,
            augment: true,
            augment_target: None,
            augment_seed: None,
            augment_angles: None,
            augment_noise_std: DEFAULT_NOISE_STD,
            augment_splits: vec![Split::Train],
            allow_undershoot: false,
            descriptor: DescriptorKind::Lbp,
            resize: DEFAULT_RESIZE,
            lbp_radius: lbp.radius,
            lbp_uniform: lbp.uniform,
            hog_cell_size: hog.cell_size,
            hog_block_size: hog.block_size,
            hog_block_stride: hog.block_stride,
            hog_bins: hog.bins,
            hog_signed: hog.signed,
            hog_clip: hog.clip,
            import_features: None,
            model: ClassifierKind::Knn,
            model_seed: None,
            standardize: spec.standardize,
            k: spec.k,
            hidden: spec.hidden,
            learning_rate: None,
            epochs: spec.gd.epochs,
            l2: None,
            plateau_tol: spec.gd.plateau_tol,
            plateau_patience: spec.gd.plateau_patience,
            batch_size: None,
            ridge: spec.ridge,
            eval_split: Split::Test,
            jobs: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::usage(format!("config: {e}")))
    }

    /// Layers `overrides` (typically CLI flags) over the config file at
    /// `path`, or over the defaults when there is no file.
    pub fn load(path: Option<&Path>, overrides: Map<String, Value>) -> Result<Self, PipelineError> {
        let mut doc = Map::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| PipelineError::input(format!("config {}", path.display()), e))?;
            let value: Value =
                serde_json::from_str(&text).map_err(|e| PipelineError::usage(format!("config {}: {e}", path.display())))?;
            let Value::Object(map) = value else {
                return Err(PipelineError::usage(format!("config {}: expected a JSON object", path.display())));
            };
            doc = map;
            let base = path.parent().unwrap_or(Path::new(""));
            for key in PATH_KEYS {
                if let Some(Value::String(p)) = doc.get(key) {
                    if Path::new(p).is_relative() {
                        let joined = base.join(p).to_string_lossy().into_owned();
                        doc.insert(key.to_string(), Value::String(joined));
                    }
                }
            }
        }
        doc.extend(overrides);
        serde_json::from_value(Value::Object(doc)).map_err(|e| PipelineError::usage(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialises");
        s.push('\n');
        s
    }

    /// Checks every stage's parameters; returns warnings for settings that
    /// have no effect.
    pub fn validate(&self) -> Result<Vec<String>, PipelineError> {
        let mut warnings = Vec::new();
        let usage = |m: String| Err(PipelineError::usage(m));
        let ratio_sum: f64 = self.split_ratios.iter().sum();
        if self.split_ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || (ratio_sum - 1.0).abs() > 1e-9 {
            return usage(format!("split_ratios {:?} must be non-negative and sum to 1", self.split_ratios));
        }
        self.sve_strategy()?;
        if self.weight.is_some() && !self.strategy.uses_weight() {
            warnings.push(format!("weight is unused by strategy {}", self.strategy.name()));
        }
        if self.gamma.is_some() && !self.strategy.uses_gamma() {
            warnings.push(format!("gamma is unused by strategy {}", self.strategy.name()));
        }
        if !(self.augment_noise_std.is_finite() && self.augment_noise_std >= 0.0) {
            return usage(format!("augment_noise_std {} must be finite and >= 0", self.augment_noise_std));
        }
        if let Some(a) = self.augment_angles.as_ref() {
            if a.is_empty() || a.iter().any(|x| !x.is_finite()) {
                return usage("augment_angles must be a non-empty list of finite angles".into());
            }
        }
        if self.augment_splits.is_empty() || self.augment_splits.contains(&Split::Unassigned) {
            return usage("augment_splits must list some of train, val, test".into());
        }
        if !Split::ASSIGNED.contains(&self.eval_split) {
            return usage("eval_split must be train, val or test".into());
        }
        if self.eval_split == Split::Train {
            warnings.push("evaluating on the training split".into());
        }
        if self.import_features.is_none() {
            self.descriptor()
                .dimension(self.resize.max(16), self.resize.max(16))
                .map_err(|e| PipelineError::usage(e.to_string()))?;
        } else if self.augment {
            warnings.push("imported features must include a row for every augmented sample".into());
        }
        self.classifier_spec()
            .validate()
            .map_err(|e| PipelineError::usage(e.to_string()))?;
        if self.jobs == Some(0) {
            return usage("jobs must be at least 1".into());
        }
        Ok(warnings)
    }

    pub fn split_seed(&self) -> u64 {
        self.split_seed.unwrap_or(self.seed)
    }

    pub fn augment_seed(&self) -> u64 {
        self.augment_seed.unwrap_or(self.seed)
    }

    pub fn model_seed(&self) -> u64 {
        self.model_seed.unwrap_or(self.seed)
    }

    pub fn sve_strategy(&self) -> Result<SveStrategy, PipelineError> {
        SveStrategy::new(
            self.strategy,
            self.weight.unwrap_or(DEFAULT_WEIGHT),
            self.gamma.unwrap_or(DEFAULT_GAMMA),
        )
        .map_err(|e| PipelineError::usage(e.to_string()))
    }

    pub fn plan_options(&self, target: usize) -> PlanOptions {
        PlanOptions {
            target_per_class: target,
            seed: self.augment_seed(),
            angles: self.augment_angles.clone().unwrap_or_else(default_angle_cycle),
            noise_std: self.augment_noise_std,
            allow_undershoot: self.allow_undershoot,
        }
    }

    pub fn descriptor(&self) -> Descriptor {
        match self.descriptor {
            DescriptorKind::Lbp => Descriptor::Lbp(LbpParams {
                radius: self.lbp_radius,
                neighbors: 8,
                uniform: self.lbp_uniform,
            }),
            DescriptorKind::Hog => Descriptor::Hog(HogParams {
                cell_size: self.hog_cell_size,
                block_size: self.hog_block_size,
                block_stride: self.hog_block_stride,
                bins: self.hog_bins,
                signed: self.hog_signed,
                clip: self.hog_clip,
            }),
        }
    }

    /// Descriptor id written into feature tables and models.
    pub fn descriptor_id(&self) -> String {
        match self.import_features {
            Some(_) => IMPORTED_DESCRIPTOR.to_string(),
            None => self.descriptor().id(),
        }
    }

    pub fn resize_dims(&self) -> Option<(usize, usize)> {
        (self.resize > 0).then_some((self.resize, self.resize))
    }

    pub fn classifier_spec(&self) -> ClassifierSpec {
        let mut spec = ClassifierSpec::new(self.model);
        spec.seed = self.model_seed();
        spec.standardize = self.standardize;
        spec.k = self.k;
        spec.hidden = self.hidden;
        spec.ridge = self.ridge;
        if let Some(lr) = self.learning_rate {
            spec.gd.learning_rate = lr;
        }
        if let Some(l2) = self.l2 {
            spec.gd.l2 = l2;
        }
        spec.gd.epochs = self.epochs;
        spec.gd.plateau_tol = self.plateau_tol;
        spec.gd.plateau_patience = self.plateau_patience;
        spec.gd.batch_size = self.batch_size;
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        assert!(c.validate().unwrap().is_empty());
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(RunConfig::from_json("{}").unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = RunConfig::from_json(r#"{"wieght": 0.3}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn overrides_win_and_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"manifest": "data/m.csv", "k": 3, "seed": 4}"#).unwrap();
        let mut o = Map::new();
        o.insert("k".into(), json!(7));
        let c = RunConfig::load(Some(&path), o).unwrap();
        assert_eq!(c.k, 7);
        assert_eq!(c.seed, 4);
        assert_eq!(c.manifest.as_deref(), Some(dir.path().join("data/m.csv").as_path()));
        assert_eq!(c.classifier_spec().seed, 4);
    }

    #[test]
    fn unused_weight_warns() {
        let c = RunConfig {
            strategy: SveVariant::VesselOnly,
            weight: Some(0.3),
            ..RunConfig::default()
        };
        let w = c.validate().unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("weight"));
        let c = RunConfig {
            weight: Some(0.3),
            ..RunConfig::default()
        };
        assert!(c.validate().unwrap().is_empty());
    }

    #[test]
    fn invalid_settings_are_usage_errors() {
        for bad in [
            json!({"split_ratios": [0.5, 0.2, 0.2]}),
            json!({"weight": -1.0}),
            json!({"k": 0}),
            json!({"augment_splits": []}),
            json!({"lbp_radius": 0}),
            json!({"eval_split": "unassigned"}),
        ] {
            let c = RunConfig::from_json(&bad.to_string()).unwrap();
            assert_eq!(c.validate().unwrap_err().exit_code(), 2, "{bad}");
        }
    }
}
