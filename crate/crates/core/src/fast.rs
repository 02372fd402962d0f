//! Near-linear-time pipeline.
//!
//! 1. Keep each point with probability `min(1, c·ln k / (α·|A_x|))`, where
//!    `A_x` is its predicted class, and run the robust estimator on the sample.
//! 2. Map the centers through two seeded Gaussian projections (a JL map to
//!    `O(log n)` dimensions, then a map to `O(log k)` dimensions checked
//!    against every sampled point/center pair).
//! 3. For each point, query an approximate nearest-center index at radius
//!    half its distance to its predicted center, and switch to the returned
//!    center only if it is less than twice as far (in the original space) as
//!    the predicted one.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, sq_dist, CenterSet, LabelAssignment, PointSet};
use crate::learned::{check_alpha, cluster_with_predictor};
use crate::rng::RngStream;
use crate::sum::BLOCK;
use crate::warning::Warning;

/// Linear map `R^in -> R^out`, `x -> scale · M x`. `None` matrix is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    in_dim: usize,
    out_dim: usize,
    matrix: Option<Vec<f64>>,
    scale: f64,
}

impl Projection {
    pub fn identity(d: usize) -> Self {
        Self {
            in_dim: d,
            out_dim: d,
            matrix: None,
            scale: 1.0,
        }
    }

    /// Gaussian JL map with entries `N(0, 1)` scaled by `1/sqrt(out_dim)`,
    /// so squared lengths are preserved in expectation.
    pub fn gaussian(in_dim: usize, out_dim: usize, rng: RngStream) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(invalid("projection", "dimensions must be >= 1"));
        }
        let matrix: Vec<f64> = (0..out_dim)
            .into_par_iter()
            .flat_map_iter(|row| {
                let mut r = rng.child(row as u64).rng();
                (0..in_dim)
                    .map(move |_| StandardNormal.sample(&mut r))
                    .collect::<Vec<f64>>()
            })
            .collect();
        Ok(Self {
            in_dim,
            out_dim,
            matrix: Some(matrix),
            scale: 1.0 / (out_dim as f64).sqrt(),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_none()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.in_dim, "projection input dimension");
        match &self.matrix {
            None => x.to_vec(),
            Some(m) => m
                .chunks_exact(self.in_dim)
                .map(|row| self.scale * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .collect(),
        }
    }

    pub fn apply_points(&self, points: &PointSet) -> Result<PointSet> {
        if points.d() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                got: points.d(),
            });
        }
        if self.is_identity() {
            return Ok(points.clone());
        }
        let values: Vec<f64> = (0..points.n())
            .into_par_iter()
            .with_min_len(64)
            .flat_map_iter(|i| self.apply(points.row(i)))
            .collect();
        PointSet::new(self.out_dim, values)
    }

    pub fn apply_centers(&self, centers: &CenterSet) -> Result<CenterSet> {
        Ok(self.apply_points(&centers.as_points())?.into())
    }
}

/// Target dimension `ceil(constant · ln(size) / ε²)` for a distortion `1 ± ε`.
pub fn jl_dimension(size: usize, epsilon: f64, constant: f64) -> usize {
    let size = size.max(2) as f64;
    ((constant * size.ln()) / (epsilon * epsilon)).ceil().max(1.0) as usize
}

/// Seeded Gaussian projection to `target` dimensions.
pub fn build_projection(d: usize, target: usize, rng: RngStream) -> Result<Projection> {
    if target == 0 {
        return Err(invalid("target", "must be >= 1"));
    }
    Projection::gaussian(d, target, rng)
}

#[derive(Debug, Clone, PartialEq)]
enum Backend {
    Scan,
    Lsh {
        /// Per table, `bits` hyperplanes of the center dimension.
        planes: Vec<Vec<f64>>,
        buckets: Vec<HashMap<u64, Vec<usize>>>,
        bits: usize,
    },
}

/// `(c, r)`-approximate nearest neighbor index over a small set of centers.
///
/// Contract: if some center lies within `r` of the query, [`query`](Self::query)
/// returns a center within `c·r`. It may return `None` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnIndex {
    centers: CenterSet,
    c: f64,
    backend: Backend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnnKind {
    #[default]
    LinearScan,
    HyperplaneLsh {
        tables: usize,
        bits: usize,
    },
}

impl AnnIndex {
    /// Exact scan over all centers; satisfies the contract for any `c >= 1`.
    pub fn linear_scan(centers: &CenterSet) -> Self {
        Self {
            centers: centers.clone(),
            c: 2.0,
            backend: Backend::Scan,
        }
    }

    /// Random-hyperplane buckets searched first, with a full scan when no
    /// bucket candidate is close enough, so the contract still holds.
    pub fn hyperplane_lsh(centers: &CenterSet, tables: usize, bits: usize, rng: RngStream) -> Result<Self> {
        if tables == 0 || bits == 0 || bits > 64 {
            return Err(invalid("lsh", "need tables >= 1 and 1 <= bits <= 64"));
        }
        let d = centers.d();
        let mut planes = Vec::with_capacity(tables);
        let mut buckets = Vec::with_capacity(tables);
        for t in 0..tables {
            let mut r = rng.child(t as u64).rng();
            let p: Vec<f64> = (0..bits * d).map(|_| StandardNormal.sample(&mut r)).collect();
            let mut b: HashMap<u64, Vec<usize>> = HashMap::new();
            for (j, c) in centers.rows().enumerate() {
                b.entry(hash_bits(&p, c, bits)).or_default().push(j);
            }
            planes.push(p);
            buckets.push(b);
        }
        Ok(Self {
            centers: centers.clone(),
            c: 2.0,
            backend: Backend::Lsh { planes, buckets, bits },
        })
    }

    pub fn build(centers: &CenterSet, kind: AnnKind, rng: RngStream) -> Result<Self> {
        match kind {
            AnnKind::LinearScan => Ok(Self::linear_scan(centers)),
            AnnKind::HyperplaneLsh { tables, bits } => Self::hyperplane_lsh(centers, tables, bits, rng),
        }
    }

    pub fn approximation(&self) -> f64 {
        self.c
    }

    pub fn centers(&self) -> &CenterSet {
        &self.centers
    }

    pub fn query(&self, q: &[f64], r: f64) -> Option<usize> {
        let limit = self.c * r;
        if let Backend::Lsh { planes, buckets, bits } = &self.backend {
            let mut best: Option<(usize, f64)> = None;
            for (p, b) in planes.iter().zip(buckets) {
                if let Some(cands) = b.get(&hash_bits(p, q, *bits)) {
                    for &j in cands {
                        let dd = dist(q, self.centers.row(j));
                        if best.is_none_or(|(bj, bd)| dd < bd || (dd == bd && j < bj)) {
                            best = Some((j, dd));
                        }
                    }
                }
            }
            if let Some((j, dd)) = best {
                if dd <= limit {
                    return Some(j);
                }
            }
        }
        let (j, dd) = scan(q, &self.centers);
        (dd <= limit).then_some(j)
    }
}

fn scan(q: &[f64], centers: &CenterSet) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.rows().enumerate() {
        let dd = sq_dist(q, c);
        if dd < best.1 {
            best = (j, dd);
        }
    }
    (best.0, best.1.sqrt())
}

fn hash_bits(planes: &[f64], x: &[f64], bits: usize) -> u64 {
    let d = x.len();
    let mut h = 0u64;
    for b in 0..bits {
        let dot: f64 = planes[b * d..(b + 1) * d].iter().zip(x).map(|(a, v)| a * v).sum();
        if dot >= 0.0 {
            h |= 1 << b;
        }
    }
    h
}

pub fn ann_build(centers: &CenterSet) -> AnnIndex {
    AnnIndex::linear_scan(centers)
}

pub fn ann_query(index: &AnnIndex, q: &[f64], r: f64) -> Option<usize> {
    index.query(q, r)
}

/// Keep each point independently with probability
/// `min(1, c·ln(max(k, 2)) / (α·|A_x|))`. Returns ascending indices.
pub fn sample_by_class(
    predicted: &LabelAssignment,
    k: usize,
    alpha: f64,
    sample_constant: f64,
    rng: RngStream,
) -> Result<Vec<usize>> {
    check_alpha(alpha)?;
    let n = predicted.len();
    predicted.validate_complete(n, k)?;
    let sizes: Vec<usize> = predicted.classes(k).iter().map(Vec::len).collect();
    let numer = sample_constant * (k.max(2) as f64).ln() / alpha;
    let probs: Vec<f64> = sizes
        .iter()
        .map(|&s| if s == 0 { 0.0 } else { (numer / s as f64).min(1.0) })
        .collect();
    let src = predicted.as_slice();
    let kept = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut r = rng.child(b as u64).rng();
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            (lo..hi)
                .filter(|&i| {
                    let u: f64 = r.random();
                    let p = probs[src[i].expect("validated")];
                    p >= 1.0 || u < p
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastConfig {
    /// Projection distortion target `1 ± ε`; `ε = 1/4` gives the 5/4 contract.
    pub epsilon: f64,
    /// Constant in the JL dimension formula.
    pub jl_constant: f64,
    /// Constant `c` in the sampling probability.
    pub sample_constant: f64,
    pub ann: AnnKind,
    /// Minimum predicted class size expected by the caller; smaller classes
    /// are reported, nothing else changes.
    pub min_class_size: Option<usize>,
}

impl Default for FastConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            jl_constant: 8.0,
            sample_constant: 100.0,
            ann: AnnKind::LinearScan,
            min_class_size: None,
        }
    }
}

impl FastConfig {
    /// Upper distortion bound each non-identity projection is held to.
    pub fn distortion(&self) -> f64 {
        1.0 + self.epsilon
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FastOutput {
    pub centers: CenterSet,
    pub labels: LabelAssignment,
    pub sample_size: usize,
    /// Dimension after the first and after the second projection.
    pub projected_dims: (usize, usize),
    /// Points whose final label differs from the predicted one.
    pub reassigned: usize,
    pub warnings: Vec<Warning>,
}

/// The composed map and what it was checked against.
#[derive(Debug, Clone)]
pub struct CenterEmbedding {
    pub outer: Projection,
    pub inner: Projection,
    /// Largest ratio `max(r, 1/r)` seen while validating the inner map.
    pub worst_ratio: f64,
    pub fell_back: bool,
}

impl CenterEmbedding {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.inner.apply(&self.outer.apply(x))
    }

    /// Multiplicative bound on how far projected distances can exceed the
    /// original ones under the validated contract.
    pub fn expansion(&self, per_stage: f64) -> f64 {
        let mut e = 1.0;
        if !self.outer.is_identity() {
            e *= per_stage;
        }
        if !self.inner.is_identity() {
            e *= per_stage;
        }
        e
    }
}

/// Build the two-stage projection. The first stage goes to
/// `jl_dimension(n)` dimensions, the second to `jl_dimension(k)`; a stage whose
/// target is not below its input dimension is the identity. The second stage
/// is checked on every (sample point, center) pair and replaced by the
/// identity if any distance ratio leaves `[1/(1+ε), 1+ε]`.
pub fn build_center_embedding(
    d: usize,
    n: usize,
    sample: &PointSet,
    centers: &CenterSet,
    config: &FastConfig,
    rng: RngStream,
) -> Result<CenterEmbedding> {
    let t1 = jl_dimension(n, config.epsilon, config.jl_constant);
    let outer = if t1 < d {
        build_projection(d, t1, rng.phase("outer"))?
    } else {
        Projection::identity(d)
    };
    let mid = outer.out_dim();
    let t2 = jl_dimension(centers.k(), config.epsilon, config.jl_constant);
    if t2 >= mid {
        return Ok(CenterEmbedding {
            outer,
            inner: Projection::identity(mid),
            worst_ratio: 1.0,
            fell_back: false,
        });
    }
    let inner = build_projection(mid, t2, rng.phase("inner"))?;
    let s_mid = outer.apply_points(sample)?;
    let c_mid = outer.apply_centers(centers)?;
    let s_low = inner.apply_points(&s_mid)?;
    let c_low = inner.apply_centers(&c_mid)?;
    let worst = (0..s_mid.n())
        .into_par_iter()
        .map(|i| {
            let mut w: f64 = 1.0;
            for j in 0..c_mid.k() {
                let orig = dist(s_mid.row(i), c_mid.row(j));
                if orig > 0.0 {
                    let ratio = dist(s_low.row(i), c_low.row(j)) / orig;
                    w = w.max(ratio).max(1.0 / ratio);
                }
            }
            w
        })
        .reduce(|| 1.0, f64::max);
    let bound = config.distortion();
    if worst > bound {
        Ok(CenterEmbedding {
            outer,
            inner: Projection::identity(mid),
            worst_ratio: worst,
            fell_back: true,
        })
    } else {
        Ok(CenterEmbedding {
            outer,
            inner,
            worst_ratio: worst,
            fell_back: false,
        })
    }
}

/// The final-label rule: switch to the candidate only if it is strictly less
/// than twice as far as the predicted center.
#[inline]
pub fn reassign(dist_candidate: f64, dist_predicted: f64, candidate: usize, predicted: usize) -> usize {
    if dist_candidate < 2.0 * dist_predicted {
        candidate
    } else {
        predicted
    }
}

pub fn fast_cluster(
    points: &PointSet,
    predicted: &LabelAssignment,
    k: usize,
    alpha: f64,
    rng: RngStream,
) -> Result<FastOutput> {
    fast_cluster_with(points, predicted, k, alpha, rng, &FastConfig::default())
}

pub fn fast_cluster_with(
    points: &PointSet,
    predicted: &LabelAssignment,
    k: usize,
    alpha: f64,
    rng: RngStream,
    config: &FastConfig,
) -> Result<FastOutput> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(invalid("k", "must be >= 1"));
    }
    predicted.validate_complete(points.n(), k)?;
    let mut warnings = Vec::new();
    if let Some(min) = config.min_class_size {
        for (label, members) in predicted.classes(k).iter().enumerate() {
            if !members.is_empty() && members.len() < min {
                warnings.push(Warning::SmallClass {
                    label,
                    size: members.len(),
                    min,
                });
            }
        }
    }

    let mut sample = sample_by_class(predicted, k, alpha, config.sample_constant, rng.phase("sample"))?;
    if sample.is_empty() {
        sample = (0..points.n()).collect();
    }
    let sample_points = points.select(&sample)?;
    let sample_labels = LabelAssignment::new(sample.iter().map(|&i| predicted.get(i)).collect());
    let learned = cluster_with_predictor(&sample_points, &sample_labels, k, alpha, rng.phase("centers"))?;
    warnings.extend(learned.warnings);
    let centers = learned.centers;

    let embedding = build_center_embedding(points.d(), points.n(), &sample_points, &centers, config, rng.phase("embed"))?;
    if embedding.fell_back {
        warnings.push(Warning::ProjectionFallback {
            stage: "terminal".into(),
            worst_ratio: embedding.worst_ratio,
        });
    }
    let projected = CenterSet::from_rows(&centers.rows().map(|c| embedding.apply(c)).collect::<Vec<_>>())?;
    let index = AnnIndex::build(&projected, config.ann, rng.phase("ann"))?;
    let expansion = embedding.expansion(config.distortion());
    let identity = embedding.outer.is_identity() && embedding.inner.is_identity();

    let final_labels: Vec<Option<usize>> = (0..points.n())
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let x = points.row(i);
            let l = predicted.get(i).expect("validated");
            let rho = dist(x, centers.row(l));
            if rho == 0.0 {
                return Some(l);
            }
            let r = 0.5 * rho * expansion;
            let hit = if identity {
                index.query(x, r)
            } else {
                index.query(&embedding.apply(x), r)
            };
            Some(match hit {
                Some(p) if p != l => reassign(dist(x, centers.row(p)), rho, p, l),
                _ => l,
            })
        })
        .collect();
    let reassigned = final_labels
        .iter()
        .zip(predicted.as_slice())
        .filter(|(a, b)| a != b)
        .count();
    Ok(FastOutput {
        centers,
        labels: LabelAssignment::new(final_labels),
        sample_size: sample.len(),
        projected_dims: (embedding.outer.out_dim(), embedding.inner.out_dim()),
        reassigned,
        warnings,
    })
}
