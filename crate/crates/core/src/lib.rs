//! Learning-augmented clustering.
//!
//! Given points and a noisy predictor of their cluster labels, compute a
//! near-optimal k-means (or k-median) clustering. The noise can be random
//! relabeling, adversarial relabeling, or outright deletion of labels.
//!
//! Modules:
//! - [`geometry`]: point and center sets, labels, objectives, assignment
//! - [`crd_est`]: the one-dimensional robust center estimator
//! - [`learned`]: per-class robust centers and `α` selection
//! - [`fast`]: sampling + projection + approximate nearest center labeling
//! - [`deletion`]: clustering with a predictor that abstains instead of lying
//! - [`kmedian`]: geometric medians and the k-median variant
//! - [`predictors`]: corruption models and simple base predictors
//! - [`baselines`]: kmeans++, Lloyd, and the random-sampling baseline
//! - [`synth`]: synthetic instances
//! - [`formats`]: CSV / label file / spec-string parsing
//! - [`report`]: the JSON run report

pub mod baselines;
pub mod crd_est;
pub mod deletion;
pub mod error;
pub mod fast;
pub mod formats;
pub mod geometry;
pub mod kmedian;
pub mod learned;
pub mod predictors;
pub mod report;
pub mod rng;
pub mod sum;
pub mod synth;
mod warning;

pub use error::{Error, Result};
pub use geometry::{CenterSet, LabelAssignment, PointSet};
pub use rng::RngStream;
pub use warning::Warning;
