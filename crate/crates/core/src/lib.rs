//! Vessel-mask guided enhancement and classification of retinal fundus images.
//!
//! The crate is organised as one module per pipeline stage:
//!
//! - [`imaging`]: RGB rasters, binary vessel masks, HSI conversion, PNG/PPM I/O.
//! - [`enhance`]: segmentation-based vascular enhancement (SVE) of the HSI
//!   intensity channel, plus the alternative vessel-highlighting strategies.
//! - [`augment`]: seeded rotation, mirroring, Gaussian noise, same-class cutmix,
//!   random crop, and the class-balancing plan that schedules them.
//! - [`features`]: HOG and LBP descriptors, the feature-table CSV interchange
//!   format and z-score standardisation.
//! - [`classify`]: KNN, MLP, multinomial logistic regression and LDA behind a
//!   single fit / score contract.
//! - [`evaluate`]: confusion matrices, per-class and averaged metrics, one-vs-rest
//!   ROC curves and AUC summaries.
//! - [`dataset`]: the 14-label manifest model and the stratified split.
//! - [`pipeline`]: run configuration and the stage commands used by the CLI.
//!
//! Every stochastic step takes an explicit seed; identical inputs and seeds give
//! bit-identical outputs.

pub mod augment;
pub mod classify;
pub mod dataset;
pub mod enhance;
pub mod evaluate;
pub mod features;
pub mod imaging;
pub mod label;
mod numfmt;
pub mod pipeline;
pub mod seed;
pub mod synthetic;

pub use label::{Label, NUM_CLASSES};
