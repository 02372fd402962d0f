//! Label predictors and the corruption models used to simulate noisy ones.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::kmeanspp_labels;
use crate::error::{invalid, Error, Result};
use crate::geometry::{sq_dist, CenterSet, LabelAssignment, PointSet};
use crate::rng::RngStream;
use crate::sum::BLOCK;

/// Which wrong label an adversarial corruption writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarialTarget {
    /// Label of the reference center farthest from the point.
    #[default]
    FarthestCenter,
    /// `(label + 1) mod k`.
    NextLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionMode {
    #[default]
    None,
    /// Replace with a label drawn uniformly from all `k` labels (possibly the same one).
    Uniform,
    Adversarial(AdversarialTarget),
    /// Replace with the unlabeled marker.
    Deletion,
}

/// Corruption model applied on top of a base labeling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub mode: CorruptionMode,
    /// Per-point corruption probability `λ`; ignored for [`CorruptionMode::None`].
    pub rate: f64,
    pub seed: u64,
}

impl PredictorSpec {
    pub fn new(mode: CorruptionMode, rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(invalid("rate", format!("must lie in [0, 1], got {rate}")));
        }
        Ok(Self { mode, rate, seed })
    }

    pub fn clean() -> Self {
        Self {
            mode: CorruptionMode::None,
            rate: 0.0,
            seed: 0,
        }
    }
}

/// Corrupt each label independently with probability `spec.rate`.
///
/// Every point consumes the same random draws whatever the rate, so raising
/// `λ` under a fixed seed only adds corrupted points. `geometry` (the points
/// and one reference center per label) is required by the farthest-center
/// adversary and ignored otherwise.
pub fn corrupt(
    labels: &LabelAssignment,
    k: usize,
    spec: &PredictorSpec,
    geometry: Option<(&PointSet, &CenterSet)>,
) -> Result<LabelAssignment> {
    if k == 0 {
        return Err(invalid("k", "must be >= 1"));
    }
    if !(0.0..=1.0).contains(&spec.rate) {
        return Err(invalid("rate", format!("must lie in [0, 1], got {}", spec.rate)));
    }
    if let Some(index) = labels.as_slice().iter().position(Option::is_none) {
        return Err(Error::MissingLabel { index });
    }
    if spec.mode == CorruptionMode::None {
        return Ok(labels.clone());
    }
    let n = labels.len();
    labels.validate(n, k)?;
    let far = match spec.mode {
        CorruptionMode::Adversarial(AdversarialTarget::FarthestCenter) => {
            let (points, centers) = geometry
                .ok_or_else(|| invalid("geometry", "farthest-center corruption needs points and reference centers"))?;
            if points.n() != n {
                return Err(Error::LengthMismatch {
                    labels: n,
                    points: points.n(),
                });
            }
            if centers.k() != k || centers.d() != points.d() {
                return Err(invalid(
                    "reference centers",
                    format!("expected {k} centers of dimension {}", points.d()),
                ));
            }
            Some((points, centers))
        }
        _ => None,
    };
    let base = RngStream::new(spec.seed).phase("corrupt");
    let src = labels.as_slice();
    let out: Vec<Option<usize>> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut r = base.child(b as u64).rng();
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            (lo..hi)
                .map(|i| {
                    let u: f64 = r.random();
                    let draw = r.random_range(0..k);
                    let l = src[i].expect("checked complete");
                    if u >= spec.rate {
                        return Some(l);
                    }
                    match spec.mode {
                        CorruptionMode::None => Some(l),
                        CorruptionMode::Uniform => Some(draw),
                        CorruptionMode::Deletion => None,
                        CorruptionMode::Adversarial(AdversarialTarget::NextLabel) => Some((l + 1) % k),
                        CorruptionMode::Adversarial(AdversarialTarget::FarthestCenter) => {
                            let (points, centers) = far.expect("checked above");
                            Some(farthest_center(points.row(i), centers))
                        }
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(LabelAssignment::new(out))
}

fn farthest_center(p: &[f64], centers: &CenterSet) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, c) in centers.rows().enumerate() {
        let dd = sq_dist(p, c);
        if dd > best.1 {
            best = (j, dd);
        }
    }
    best.0
}

/// Label every query with the label of its nearest reference point; ties go to
/// the smaller reference index.
pub fn nn_predictor(
    reference_points: &PointSet,
    reference_labels: &LabelAssignment,
    query_points: &PointSet,
) -> Result<LabelAssignment> {
    if reference_labels.len() != reference_points.n() {
        return Err(Error::LengthMismatch {
            labels: reference_labels.len(),
            points: reference_points.n(),
        });
    }
    if let Some(index) = reference_labels.as_slice().iter().position(Option::is_none) {
        return Err(Error::MissingLabel { index });
    }
    if reference_points.d() != query_points.d() {
        return Err(Error::DimensionMismatch {
            expected: reference_points.d(),
            got: query_points.d(),
        });
    }
    let labels: Vec<Option<usize>> = (0..query_points.n())
        .into_par_iter()
        .with_min_len(64)
        .map(|q| {
            let qp = query_points.row(q);
            let mut best = (0, f64::INFINITY);
            for (i, r) in reference_points.rows().enumerate() {
                let dd = sq_dist(qp, r);
                if dd < best.1 {
                    best = (i, dd);
                }
            }
            reference_labels.get(best.0)
        })
        .collect();
    Ok(LabelAssignment::new(labels))
}

/// Labels of the nearest kmeans++ seed.
pub fn kmeanspp_predictor(points: &PointSet, k: usize, rng: RngStream) -> Result<LabelAssignment> {
    kmeanspp_labels(points, k, rng)
}
