//! Run configuration and the stage commands behind the command-line tool.
//!
//! A pipeline run lives in one output directory with a sub-directory per
//! stage:
//!
//! ```text
//! 01_split/     manifest.csv
//! 02_enhance/   images/, manifest.csv
//! 03_augment/   images/, plan.json, manifest.csv
//! 04_features/  train.csv, val.csv, test.csv
//! 05_train/     model.json
//! 06_predict/   scores.csv, predictions.csv
//! 07_evaluate/  report.json, confusion.csv, roc_class<c>.csv
//! ```
//!
//! Every stage writes a JSON log (`log.json`, or `<stem>.log.json` next to a
//! single-file artifact) holding the tool version, seed, parameters, the
//! SHA-256 of each input and of each output. A stage whose log fingerprint
//! matches the current inputs and parameters, and whose outputs are intact,
//! is skipped on the next run.
//!
//! Failures carry an [`ErrorCategory`] that maps onto the process exit code:
//! 2 for usage errors, 3 for input errors, 4 for numeric or degenerate
//! results.

mod config;
mod stages;

pub use config::{DescriptorKind, RunConfig};
pub use stages::{
    cmd_augment, cmd_enhance, cmd_evaluate, cmd_features, cmd_features_import, cmd_manifest_init, cmd_pipeline,
    cmd_predict, cmd_split, cmd_train, log_path_for, pipeline_plan, predictions_path_for, InputDigest, PipelineOptions,
    PipelineOutcome, PlannedStage, StageLog, StageOutcome, STAGES,
};

use std::error::Error as StdError;
use std::fmt;

use crate::augment::AugmentError;
use crate::classify::ClassifyError;
use crate::dataset::DatasetError;
use crate::enhance::SveError;
use crate::evaluate::EvalError;
use crate::features::FeatureError;
use crate::imaging::ImageIoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Input,
    Numeric,
}

impl ErrorCategory {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCategory::Usage => 2,
            ErrorCategory::Input => 3,
            ErrorCategory::Numeric => 4,
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorCategory::Usage => "usage error",
            ErrorCategory::Input => "input error",
            ErrorCategory::Numeric => "numeric error",
        })
    }
}

type BoxError = Box<dyn StdError + Send + Sync>;

/// A categorised failure with the stage or file it happened in.
#[derive(Debug)]
pub struct PipelineError {
    pub category: ErrorCategory,
    pub context: String,
    source: Option<BoxError>,
}

impl PipelineError {
    pub fn new(category: ErrorCategory, context: impl Into<String>, source: Option<BoxError>) -> Self {
        PipelineError {
            category,
            context: context.into(),
            source,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorCategory::Usage, message, None)
    }

    pub fn input(context: impl Into<String>, source: impl Into<BoxError>) -> Self {
        Self::new(ErrorCategory::Input, context, Some(source.into()))
    }

    pub fn exit_code(&self) -> u8 {
        self.category.exit_code()
    }

    /// Prefixes the context, e.g. with the failing stage.
    pub fn within(mut self, outer: &str) -> Self {
        self.context = if self.context.is_empty() {
            outer.to_string()
        } else {
            format!("{outer}: {}", self.context)
        };
        self
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Some(s) if self.context.is_empty() => write!(f, "{}: {s}", self.category),
            Some(s) => write!(f, "{}: {}: {s}", self.category, self.context),
            None => write!(f, "{}: {}", self.category, self.context),
        }
    }
}

impl StdError for PipelineError {
    fn source(&self) -> Option<&(dyn StdError + 'static)> {
        self.source.as_deref().map(|e| e as &(dyn StdError + 'static))
    }
}

/// Module errors know which exit category they belong to.
pub trait Categorize: StdError + Send + Sync + Sized + 'static {
    fn category(&self) -> ErrorCategory;

    /// Wraps the error; a context the message already mentions is dropped.
    fn into_pipeline(self, context: impl Into<String>) -> PipelineError {
        let mut context = context.into();
        if self.to_string().contains(&context) {
            context.clear();
        }
        PipelineError::new(self.category(), context, Some(Box::new(self)))
    }
}

impl Categorize for std::io::Error {
    fn category(&self) -> ErrorCategory {
        ErrorCategory::Input
    }
}

impl Categorize for ImageIoError {
    fn category(&self) -> ErrorCategory {
        ErrorCategory::Input
    }
}

impl Categorize for DatasetError {
    fn category(&self) -> ErrorCategory {
        match self {
            DatasetError::InvalidRatios(_) => ErrorCategory::Usage,
            _ => ErrorCategory::Input,
        }
    }
}

impl Categorize for SveError {
    fn category(&self) -> ErrorCategory {
        match self {
            SveError::Image(_) => ErrorCategory::Input,
            _ => ErrorCategory::Usage,
        }
    }
}

impl Categorize for AugmentError {
    fn category(&self) -> ErrorCategory {
        match self {
            AugmentError::InvalidStd(_) | AugmentError::InvalidCropRatio(_) | AugmentError::TargetBelowLargest { .. } => {
                ErrorCategory::Usage
            }
            _ => ErrorCategory::Input,
        }
    }
}

impl Categorize for FeatureError {
    fn category(&self) -> ErrorCategory {
        match self {
            FeatureError::InvalidParams(_) => ErrorCategory::Usage,
            FeatureError::NonFiniteValue(_) => ErrorCategory::Numeric,
            _ => ErrorCategory::Input,
        }
    }
}

impl Categorize for ClassifyError {
    fn category(&self) -> ErrorCategory {
        match self {
            ClassifyError::InvalidParams(_) => ErrorCategory::Usage,
            ClassifyError::SingularCovariance | ClassifyError::Diverged | ClassifyError::NonFinite(_) => {
                ErrorCategory::Numeric
            }
            ClassifyError::Feature(f) => f.category(),
            _ => ErrorCategory::Input,
        }
    }
}

impl Categorize for EvalError {
    fn category(&self) -> ErrorCategory {
        match self {
            EvalError::UndefinedAuc { .. } | EvalError::TooFewClasses(_) => ErrorCategory::Numeric,
            _ => ErrorCategory::Input,
        }
    }
}

/// Runs `f` on a pool of `jobs` worker threads (the global pool when `None`).
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, PipelineError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(PipelineError::usage("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::new(ErrorCategory::Usage, "thread pool", Some(Box::new(e))))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_map_to_exit_codes() {
        let e = ClassifyError::SingularCovariance.into_pipeline("train");
        assert_eq!(e.exit_code(), 4);
        assert!(e.to_string().starts_with("numeric error: train: "));
        let e = ImageIoError::Missing("x.png".into()).into_pipeline("enhance");
        assert_eq!(e.exit_code(), 3);
        assert_eq!(PipelineError::usage("bad").within("split").to_string(), "usage error: split: bad");
        assert_eq!(EvalError::TooFewClasses(1).into_pipeline("").exit_code(), 4);
        let e = ImageIoError::Missing("x.png".into());
        let text = e.to_string();
        assert_eq!(e.into_pipeline("x.png").to_string(), format!("input error: {text}"));
    }

    #[test]
    fn jobs_pool() {
        assert_eq!(with_jobs(Some(2), rayon::current_num_threads).unwrap(), 2);
        assert!(with_jobs(Some(0), || ()).is_err());
    }
}
