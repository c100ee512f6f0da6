//! Meta-learners over feature tables.
//!
//! Every model follows the same contract: [`fit`] on a [`FeatureTable`],
//! then [`predict_scores`] (or [`predict`], which also returns the model's hard
//! decisions) on tables of the same dimension. Scores always have one column
//! per label of the 14-class taxonomy; classes absent from the training data
//! score zero.
//!
//! ```
//! use fundus_sve::classify::{fit, predict_scores, ClassifierSpec, ClassifierKind};
//! use fundus_sve::features::{FeatureRow, FeatureTable};
//! use fundus_sve::Label;
//!
//! let rows = (0..6)
//!     .map(|i| FeatureRow {
//!         id: format!("s{i}"),
//!         label: Label::new(i % 2).unwrap(),
//!         values: vec![(i % 2) as f64 * 10.0 + i as f64 * 0.1],
//!     })
//!     .collect();
//! let table = FeatureTable::new("demo", 1, rows).unwrap();
//! let spec = ClassifierSpec { k: 3, ..ClassifierSpec::new(ClassifierKind::Knn) };
//! let model = fit(&spec, &table).unwrap();
//! let scores = predict_scores(&model, &table).unwrap();
//! assert_eq!(scores.rows[0].scores[0], 1.0);
//! ```

mod knn;
mod lda;
mod network;
mod scores;

pub use network::TrainingLog;
pub use scores::{
    parse_decisions, predict_labels, read_decisions, read_scores, write_predictions, write_scores, Decision,
    Predictions, ScoreMatrix, ScoreRow, ROW_SUM_TOL,
};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureError, FeatureTable, Standardizer};
use crate::label::{Label, NUM_CLASSES};
use crate::seed;
use knn::KnnPoint;
use lda::LdaModel;
use network::Network;

pub const MODEL_FORMAT: &str = "fundus-sve-model";
pub const MODEL_VERSION: u32 = 1;
/// Largest feature dimension LDA accepts (the covariance is dense `d x d`).
pub const MAX_LDA_DIMENSION: usize = 4096;
/// Finite-difference step used by [`gradient_check`].
pub const GRADIENT_CHECK_STEP: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training table is empty")]
    EmptyTraining,
    #[error("feature dimension is zero")]
    ZeroDimension,
    #[error("non-finite feature value in sample {0}")]
    NonFinite(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("feature dimension mismatch: model expects {expected}, table has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("pooled covariance is singular even after ridge regularisation")]
    SingularCovariance,
    #[error("training diverged (non-finite loss)")]
    Diverged,
    #[error("invalid score row for sample {id}: {detail}")]
    InvalidScores { id: String, detail: String },
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
    #[error("{path}: corrupt model file: {detail}")]
    Corrupt { path: PathBuf, detail: String },
    #[error("{path}: unsupported model file {format} version {version}")]
    VersionMismatch {
        path: PathBuf,
        format: String,
        version: u32,
    },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Mlp,
    Logreg,
    Lda,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Knn,
        ClassifierKind::Mlp,
        ClassifierKind::Logreg,
        ClassifierKind::Lda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::Lda => "lda",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ClassifyError::InvalidParams(format!("unknown model {s:?} (knn, mlp, logreg, lda)")))
    }
}

/// Gradient-descent settings shared by the MLP and logistic regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdParams {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Stop once the epoch-to-epoch loss change stays below this...
    pub plateau_tol: f64,
    /// ...for this many consecutive epochs.
    pub plateau_patience: usize,
    /// Weight-decay coefficient on weight matrices (not biases).
    pub l2: f64,
    /// `None` trains on the full batch every epoch.
    pub batch_size: Option<usize>,
}

impl GdParams {
    fn validate(&self) -> Result<(), ClassifyError> {
        let ok = self.learning_rate.is_finite()
            && self.learning_rate > 0.0
            && self.plateau_tol.is_finite()
            && self.plateau_tol >= 0.0
            && self.plateau_patience > 0
            && self.l2.is_finite()
            && self.l2 >= 0.0
            && self.batch_size != Some(0);
        if ok {
            Ok(())
        } else {
            Err(ClassifyError::InvalidParams(format!("{self:?}")))
        }
    }
}

/// What to train and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub seed: u64,
    /// Z-score features with training statistics before fitting; the
    /// statistics are stored in the model and applied at prediction time.
    pub standardize: bool,
    /// Neighbour count (KNN).
    pub k: usize,
    /// Hidden-layer width (MLP).
    pub hidden: usize,
    /// Diagonal covariance regulariser (LDA).
    pub ridge: f64,
    /// Optimiser settings (MLP, logistic regression).
    pub gd: GdParams,
}

impl ClassifierSpec {
    /// Defaults for `kind`: k = 5; 256 hidden units trained at learning rate
    /// 0.01; logistic regression at learning rate 0.1 with L2 1e-4; ridge
    /// 1e-6. Optimisers run full batch for at most 500 epochs and stop after
    /// 20 epochs with loss change below 1e-7.
    pub fn new(kind: ClassifierKind) -> Self {
        let (learning_rate, l2) = match kind {
            ClassifierKind::Logreg => (0.1, 1e-4),
            _ => (0.01, 0.0),
        };
        ClassifierSpec {
            kind,
            seed: 0,
            standardize: true,
            k: 5,
            hidden: 256,
            ridge: 1e-6,
            gd: GdParams {
                learning_rate,
                epochs: 500,
                plateau_tol: 1e-7,
                plateau_patience: 20,
                l2,
                batch_size: None,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        match self.kind {
            ClassifierKind::Knn if self.k == 0 => Err(ClassifyError::InvalidParams("k must be at least 1".into())),
            ClassifierKind::Mlp if self.hidden == 0 => {
                Err(ClassifyError::InvalidParams("hidden width must be at least 1".into()))
            }
            ClassifierKind::Lda if !(self.ridge.is_finite() && self.ridge >= 0.0) => {
                Err(ClassifyError::InvalidParams(format!("ridge {}", self.ridge)))
            }
            ClassifierKind::Mlp | ClassifierKind::Logreg => self.gd.validate(),
            _ => Ok(()),
        }
    }

    fn layer_sizes(&self, dimension: usize, classes: usize) -> Vec<usize> {
        match self.kind {
            ClassifierKind::Mlp => vec![dimension, self.hidden, classes],
            _ => vec![dimension, classes],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Params {
    Knn { k: usize, points: Vec<KnnPoint> },
    Mlp { network: Network },
    Logreg { network: Network },
    Lda { lda: LdaModel },
}

/// A fitted, immutable model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    /// Labels seen in training, ascending; these are the model's outputs.
    pub classes: Vec<Label>,
    pub dimension: usize,
    pub descriptor: String,
    pub standardizer: Option<Standardizer>,
    pub training: TrainingLog,
    params: Params,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.spec.kind
    }

    /// Scores and decision for one already-standardised feature vector.
    fn score_one(&self, x: &[f64]) -> ([f64; NUM_CLASSES], Label) {
        let compact = match &self.params {
            Params::Knn { k, points } => return knn::vote(points, &knn::nearest(points, x, *k)),
            Params::Mlp { network } | Params::Logreg { network } => network.probabilities(x),
            Params::Lda { lda } => lda.posterior(x),
        };
        let mut scores = [0.0; NUM_CLASSES];
        for (c, p) in self.classes.iter().zip(compact) {
            scores[c.index()] = p;
        }
        (scores, scores::argmax(&scores))
    }
}

fn check_table(table: &FeatureTable) -> Result<(), ClassifyError> {
    for r in &table.rows {
        if r.values.len() != table.dimension {
            return Err(ClassifyError::DimensionMismatch {
                expected: table.dimension,
                found: r.values.len(),
            });
        }
        if r.values.iter().any(|v| !v.is_finite()) {
            return Err(ClassifyError::NonFinite(r.id.clone()));
        }
    }
    Ok(())
}

struct Prepared {
    table: FeatureTable,
    standardizer: Option<Standardizer>,
    classes: Vec<Label>,
    targets: Vec<usize>,
}

fn prepare(spec: &ClassifierSpec, train: &FeatureTable) -> Result<Prepared, ClassifyError> {
    spec.validate()?;
    if train.rows.is_empty() {
        return Err(ClassifyError::EmptyTraining);
    }
    if train.dimension == 0 {
        return Err(ClassifyError::ZeroDimension);
    }
    check_table(train)?;
    let (table, standardizer) = if spec.standardize {
        let s = Standardizer::fit(train);
        (s.transform(train)?, Some(s))
    } else {
        (train.clone(), None)
    };
    let mut classes: Vec<Label> = train.rows.iter().map(|r| r.label).collect();
    classes.sort();
    classes.dedup();
    let targets = train
        .rows
        .iter()
        .map(|r| classes.binary_search(&r.label).expect("label collected above"))
        .collect();
    Ok(Prepared {
        table,
        standardizer,
        classes,
        targets,
    })
}

/// Trains a model. Deterministic for a given spec (including its seed) and table.
pub fn fit(spec: &ClassifierSpec, train: &FeatureTable) -> Result<TrainedModel, ClassifyError> {
    let p = prepare(spec, train)?;
    let xs: Vec<&[f64]> = p.table.rows.iter().map(|r| r.values.as_slice()).collect();
    let mut training = TrainingLog::default();
    let params = match spec.kind {
        ClassifierKind::Knn => Params::Knn {
            k: spec.k,
            points: p
                .table
                .rows
                .iter()
                .map(|r| KnnPoint {
                    label: r.label,
                    values: r.values.clone(),
                })
                .collect(),
        },
        ClassifierKind::Mlp | ClassifierKind::Logreg => {
            let mut rng = seed::rng(spec.seed);
            let sizes = spec.layer_sizes(train.dimension, p.classes.len());
            let mut network = match spec.kind {
                ClassifierKind::Mlp => Network::uniform(&sizes, &mut rng),
                _ => Network::zeros(&sizes),
            };
            training = network::train(&mut network, &xs, &p.targets, &spec.gd, &mut rng);
            if training.loss_trace.iter().any(|l| !l.is_finite()) {
                return Err(ClassifyError::Diverged);
            }
            if spec.kind == ClassifierKind::Mlp {
                Params::Mlp { network }
            } else {
                Params::Logreg { network }
            }
        }
        ClassifierKind::Lda => {
            if train.dimension > MAX_LDA_DIMENSION {
                return Err(ClassifyError::InvalidParams(format!(
                    "LDA supports at most {MAX_LDA_DIMENSION} features, table has {}",
                    train.dimension
                )));
            }
            let lda = lda::fit(&xs, &p.targets, p.classes.len(), spec.ridge).ok_or(ClassifyError::SingularCovariance)?;
            Params::Lda { lda }
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        classes: p.classes,
        dimension: train.dimension,
        descriptor: train.descriptor.clone(),
        standardizer: p.standardizer,
        training,
        params,
    })
}

/// Scores and hard decisions for every row of `table`, in row order.
pub fn predict(model: &TrainedModel, table: &FeatureTable) -> Result<Predictions, ClassifyError> {
    if table.dimension != model.dimension {
        return Err(ClassifyError::DimensionMismatch {
            expected: model.dimension,
            found: table.dimension,
        });
    }
    check_table(table)?;
    let table = match &model.standardizer {
        Some(s) => s.transform(table)?,
        None => table.clone(),
    };
    let (rows, labels): (Vec<ScoreRow>, Vec<Label>) = table
        .rows
        .par_iter()
        .map(|r| {
            let (scores, decision) = model.score_one(&r.values);
            (
                ScoreRow {
                    id: r.id.clone(),
                    label: r.label,
                    scores,
                },
                decision,
            )
        })
        .unzip();
    Ok(Predictions {
        scores: ScoreMatrix::new(rows)?,
        labels,
    })
}

pub fn predict_scores(model: &TrainedModel, table: &FeatureTable) -> Result<ScoreMatrix, ClassifyError> {
    predict(model, table).map(|p| p.scores)
}

#[derive(Serialize)]
struct ModelFileOut<'a> {
    format: &'a str,
    version: u32,
    model: &'a TrainedModel,
}

#[derive(Deserialize)]
struct ModelFileIn {
    format: String,
    version: u32,
    model: serde_json::Value,
}

pub fn model_to_json(model: &TrainedModel) -> Result<String, ClassifyError> {
    let file = ModelFileOut {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        model,
    };
    serde_json::to_string_pretty(&file).map_err(|e| ClassifyError::Corrupt {
        path: PathBuf::new(),
        detail: e.to_string(),
    })
}

pub fn model_from_json(text: &str, path: &Path) -> Result<TrainedModel, ClassifyError> {
    let corrupt = |e: serde_json::Error| ClassifyError::Corrupt {
        path: path.to_path_buf(),
        detail: e.to_string(),
    };
    let file: ModelFileIn = serde_json::from_str(text).map_err(corrupt)?;
    if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
        return Err(ClassifyError::VersionMismatch {
            path: path.to_path_buf(),
            format: file.format,
            version: file.version,
        });
    }
    let model: TrainedModel = serde_json::from_value(file.model).map_err(corrupt)?;
    if model.classes.is_empty() {
        return Err(ClassifyError::Corrupt {
            path: path.to_path_buf(),
            detail: "model has no classes".into(),
        });
    }
    Ok(model)
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), ClassifyError> {
    let path = path.as_ref();
    let mut text = model_to_json(model)?;
    text.push('\n');
    scores::write_text(path, &text)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, ClassifyError> {
    let path = path.as_ref();
    model_from_json(&scores::read_text(path)?, path)
}

/// Result of comparing analytic and finite-difference gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, 1e-6)`.
    pub max_relative_error: f64,
    /// Loss at the model's training initialisation.
    pub initial_loss: f64,
    pub parameters: usize,
}

/// Checks the MLP or logistic-regression gradient on a tiny table.
///
/// The comparison runs at a seeded random parameter point (training
/// initialisation plus random biases, and random weights for logistic
/// regression, whose training initialisation is all zeros) with central
/// differences of step [`GRADIENT_CHECK_STEP`]. Features are used as given.
pub fn gradient_check(spec: &ClassifierSpec, table: &FeatureTable) -> Result<GradientCheck, ClassifyError> {
    if !matches!(spec.kind, ClassifierKind::Mlp | ClassifierKind::Logreg) {
        return Err(ClassifyError::InvalidParams(format!(
            "gradient check applies to mlp and logreg, not {}",
            spec.kind
        )));
    }
    if table.rows.len() > 20 || table.dimension > 10 {
        return Err(ClassifyError::InvalidParams(
            "gradient check expects at most 20 samples and 10 features".into(),
        ));
    }
    let spec = ClassifierSpec {
        standardize: false,
        ..spec.clone()
    };
    let p = prepare(&spec, table)?;
    let xs: Vec<&[f64]> = p.table.rows.iter().map(|r| r.values.as_slice()).collect();
    let sizes = spec.layer_sizes(table.dimension, p.classes.len());
    let mut rng = seed::rng(spec.seed);
    let initial = match spec.kind {
        ClassifierKind::Mlp => Network::uniform(&sizes, &mut rng),
        _ => Network::zeros(&sizes),
    };
    let initial_loss = initial.loss(&xs, &p.targets, spec.gd.l2);
    let mut net = initial;
    let mut rng = seed::rng(seed::mix(spec.seed, "gradient-check"));
    for layer in &mut net.layers {
        if spec.kind == ClassifierKind::Logreg {
            layer.weights.iter_mut().for_each(|w| *w = rng.random_range(-0.5..0.5));
        }
        layer.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.1..0.1));
    }
    let max_relative_error =
        network::max_relative_gradient_error(&mut net, &xs, &p.targets, spec.gd.l2, GRADIENT_CHECK_STEP);
    Ok(GradientCheck {
        max_relative_error,
        initial_loss,
        parameters: net.parameter_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureRow;
    use rand_distr::{Distribution, Normal};

    fn table(rows: Vec<(usize, Vec<f64>)>) -> FeatureTable {
        let dim = rows[0].1.len();
        FeatureTable::new(
            "t",
            dim,
            rows.into_iter()
                .enumerate()
                .map(|(i, (l, values))| FeatureRow {
                    id: format!("r{i}"),
                    label: Label::from_index(l),
                    values,
                })
                .collect(),
        )
        .unwrap()
    }

    fn random_table(n: usize, d: usize, classes: usize, seed: u64) -> FeatureTable {
        let mut rng = seed::rng(seed);
        table(
            (0..n)
                .map(|i| (i % classes, (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()))
                .collect(),
        )
    }

    fn accuracy(model: &TrainedModel, t: &FeatureTable) -> f64 {
        let p = predict(model, t).unwrap();
        let hits = p.labels.iter().zip(&t.rows).filter(|(a, r)| **a == r.label).count();
        hits as f64 / t.rows.len() as f64
    }

    #[test]
    fn single_sample_dominates() {
        let t = table(vec![(4, vec![1.0, 2.0])]);
        let q = random_table(6, 2, 1, 9);
        for kind in ClassifierKind::ALL {
            let m = fit(&ClassifierSpec::new(kind), &t).unwrap();
            for row in predict_scores(&m, &q).unwrap().rows {
                let best = row.scores.iter().cloned().fold(0.0, f64::max);
                assert_eq!(row.scores[4], best, "{kind}");
            }
        }
    }

    #[test]
    fn xor_is_learned_by_mlp() {
        let t = table(vec![
            (0, vec![-1.0, -1.0]),
            (0, vec![1.0, 1.0]),
            (1, vec![-1.0, 1.0]),
            (1, vec![1.0, -1.0]),
        ]);
        let m = fit(&ClassifierSpec::new(ClassifierKind::Mlp), &t).unwrap();
        assert_eq!(accuracy(&m, &t), 1.0);
        assert!(m.training.epochs_run <= 500);
        for row in predict_scores(&m, &t).unwrap().rows {
            assert!((row.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn logreg_separates_blobs() {
        let mut rng = seed::rng(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let rows = (0..200)
            .map(|i| {
                let c = i % 2;
                let shift = if c == 0 { -3.0 } else { 3.0 };
                (c, vec![shift + normal.sample(&mut rng), normal.sample(&mut rng)])
            })
            .collect();
        let t = table(rows);
        let m = fit(&ClassifierSpec::new(ClassifierKind::Logreg), &t).unwrap();
        assert!(accuracy(&m, &t) >= 0.99, "{}", accuracy(&m, &t));
        let trace = &m.training.loss_trace;
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-6));
        assert!((trace[0] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mlp_loss_is_monotone() {
        let t = random_table(30, 4, 3, 5);
        let m = fit(&ClassifierSpec::new(ClassifierKind::Mlp), &t).unwrap();
        let trace = &m.training.loss_trace;
        assert!(trace.len() > 2);
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-6));
    }

    #[test]
    fn knn_self_match() {
        let t = random_table(40, 3, 4, 2);
        let spec = ClassifierSpec {
            k: 1,
            ..ClassifierSpec::new(ClassifierKind::Knn)
        };
        assert_eq!(accuracy(&fit(&spec, &t).unwrap(), &t), 1.0);
    }

    #[test]
    fn lda_fits_and_scores() {
        let t = random_table(30, 3, 3, 4);
        let m = fit(&ClassifierSpec::new(ClassifierKind::Lda), &t).unwrap();
        for row in predict_scores(&m, &t).unwrap().rows {
            assert!((row.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(m.classes.len(), 3);
    }

    #[test]
    fn gradient_checks() {
        let spec = ClassifierSpec::new(ClassifierKind::Logreg);
        let g = gradient_check(&spec, &random_table(5, 3, 2, 1)).unwrap();
        assert!(g.max_relative_error < 1e-6, "{g:?}");
        let spec = ClassifierSpec {
            hidden: 8,
            ..ClassifierSpec::new(ClassifierKind::Mlp)
        };
        let g = gradient_check(&spec, &random_table(10, 4, 3, 1)).unwrap();
        assert!(g.max_relative_error < 1e-4, "{g:?}");
        assert!(gradient_check(&ClassifierSpec::new(ClassifierKind::Knn), &random_table(5, 3, 2, 1)).is_err());
    }

    #[test]
    fn zero_init_loss_is_ln2() {
        let t = random_table(6, 2, 2, 8);
        let g = gradient_check(&ClassifierSpec::new(ClassifierKind::Logreg), &t).unwrap();
        assert!((g.initial_loss - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn model_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let t = random_table(24, 3, 3, 6);
        for kind in ClassifierKind::ALL {
            let spec = ClassifierSpec {
                seed: 77,
                hidden: 16,
                ..ClassifierSpec::new(kind)
            };
            let m = fit(&spec, &t).unwrap();
            let path = dir.path().join(format!("{kind}.json"));
            save_model(&m, &path).unwrap();
            let back = load_model(&path).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.spec.seed, 77);
            assert_eq!(predict(&back, &t).unwrap(), predict(&m, &t).unwrap());

            let text = std::fs::read_to_string(&path).unwrap();
            std::fs::write(&path, &text[..text.len() / 2]).unwrap();
            assert!(matches!(load_model(&path), Err(ClassifyError::Corrupt { .. })));
            std::fs::write(&path, text.replace("\"version\": 1", "\"version\": 9")).unwrap();
            assert!(matches!(load_model(&path), Err(ClassifyError::VersionMismatch { .. })));
        }
    }

    #[test]
    fn errors() {
        let t = random_table(6, 2, 2, 8);
        let m = fit(&ClassifierSpec::new(ClassifierKind::Knn), &t).unwrap();
        assert!(matches!(
            predict(&m, &random_table(3, 3, 1, 1)),
            Err(ClassifyError::DimensionMismatch { .. })
        ));
        let empty = FeatureTable::new("t", 2, vec![]).unwrap();
        assert!(matches!(
            fit(&ClassifierSpec::new(ClassifierKind::Knn), &empty),
            Err(ClassifyError::EmptyTraining)
        ));
        let bad = ClassifierSpec {
            k: 0,
            ..ClassifierSpec::new(ClassifierKind::Knn)
        };
        assert!(fit(&bad, &t).is_err());
        assert_eq!("lda".parse::<ClassifierKind>().unwrap(), ClassifierKind::Lda);
        assert!("svm".parse::<ClassifierKind>().is_err());
    }
}
