//! Online multiple-instance boosting tracker with instance significance.
//!
//! The appearance model is a strong classifier selected from a shared pool of
//! Gaussian weak classifiers over Haar-like features. A small randomized
//! ensemble of plain MILBoost learners estimates how likely each positive
//! instance really is the object; those coefficients reweight the Noisy-OR
//! bag likelihood that drives selection of the detector.

pub mod error;
pub mod evaluation;
pub mod features;
pub mod imaging;
pub mod mil_core;
pub mod rng;
pub mod sampling;
pub mod sig_boost;
pub mod significance;
pub mod synth;
pub mod tracker;
pub mod weak_learners;

pub use error::{Error, Result};
pub use imaging::{BoundingBox, GrayFrame, IntegralImage, Rect};
pub use tracker::{run, Tracker, TrackerConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
