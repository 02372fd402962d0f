//! Geometric medians and learning-augmented k-median.

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fast::{build_projection, Projection};
use crate::geometry::{cost_kmedian, dist, CenterSet, LabelAssignment, PointSet};
use crate::rng::RngStream;
use crate::sum::CompensatedSum;
use crate::warning::Warning;

const MAX_ITERS: usize = 10_000;

/// Sum of Euclidean distances from `y` to every point.
pub fn median_objective(points: &PointSet, y: &[f64]) -> f64 {
    points.rows().map(|x| dist(x, y)).collect::<CompensatedSum>().value()
}

/// Minimum-norm subgradient of the sum-of-distances objective at `y`.
pub fn median_subgradient(points: &PointSet, y: &[f64]) -> Vec<f64> {
    let d = points.d();
    let mut g = vec![0.0; d];
    let mut at = 0usize;
    for x in points.rows() {
        let r = dist(x, y);
        if r == 0.0 {
            at += 1;
            continue;
        }
        for (gj, (xj, yj)) in g.iter_mut().zip(x.iter().zip(y)) {
            *gj += (yj - xj) / r;
        }
    }
    if at > 0 {
        // Each coincident point contributes a unit-ball term that can cancel
        // up to `at` of the remaining gradient's length.
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let keep = if norm > at as f64 { 1.0 - at as f64 / norm } else { 0.0 };
        g.iter_mut().for_each(|v| *v *= keep);
    }
    g
}

/// Weiszfeld iteration with the Vardi–Zhang step at data points.
///
/// Stops once the value is certified within `1 + eps` of the optimum. The
/// certificate uses convexity: the minimizer lies in the convex hull of the
/// points, so `f* >= f(y) - |g(y)| · max_i |x_i - y|`.
pub fn geometric_median(points: &PointSet, eps: f64) -> Result<Vec<f64>> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    let n = points.n();
    let d = points.d();
    let all: Vec<usize> = (0..n).collect();
    let mut y = crate::geometry::centroid(points, &all)?;
    if n == 1 {
        return Ok(y);
    }
    let mut best = y.clone();
    let mut best_f = median_objective(points, &y);
    for _ in 0..MAX_ITERS {
        let f = median_objective(points, &y);
        if f < best_f {
            best_f = f;
            best.clone_from(&y);
        }
        if f == 0.0 || certified(points, &y, f, eps) {
            return Ok(y);
        }
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        let mut at = 0usize;
        for x in points.rows() {
            let r = dist(x, &y);
            if r == 0.0 {
                at += 1;
                continue;
            }
            let w = 1.0 / r;
            den += w;
            for (nj, xj) in num.iter_mut().zip(x) {
                *nj += w * xj;
            }
        }
        if den == 0.0 {
            return Ok(y);
        }
        let t: Vec<f64> = num.iter().map(|v| v / den).collect();
        let next = if at == 0 {
            t
        } else {
            let rvec: Vec<f64> = t.iter().zip(&y).map(|(tj, yj)| den * (tj - yj)).collect();
            let rn = rvec.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rn <= at as f64 {
                return Ok(y);
            }
            let beta = at as f64 / rn;
            t.iter().zip(&y).map(|(tj, yj)| (1.0 - beta) * tj + beta * yj).collect()
        };
        if next == y {
            break;
        }
        y = next;
    }
    Ok(best)
}

fn certified(points: &PointSet, y: &[f64], f: f64, eps: f64) -> bool {
    let g = median_subgradient(points, y);
    let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let reach = points.rows().map(|x| dist(x, y)).fold(0.0, f64::max);
    let lower = f - gn * reach;
    gn == 0.0 || (lower > 0.0 && f <= (1.0 + eps) * lower)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMedianConfig {
    /// Constant in the projection dimension `ceil(C·ln(k/α)/α²)`.
    pub projection_constant: f64,
    /// Constant `c` in the per-class sample size `ceil(c·ln²(k/α)/α⁴)`.
    pub sample_constant: f64,
    /// Compute the projected point set and report the projected cost.
    pub project: bool,
}

impl Default for KMedianConfig {
    fn default() -> Self {
        Self {
            projection_constant: 1.0,
            sample_constant: 1.0,
            project: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMedianOutput {
    /// Centers in the original space, most frequent label first.
    pub centers: CenterSet,
    /// Label each center row was estimated from.
    pub center_labels: Vec<usize>,
    /// Points used for each center.
    pub sample_sizes: Vec<usize>,
    pub projected_dim: usize,
    /// k-median cost of the projected centers on the projected points, when computed.
    pub projected_cost: Option<f64>,
    pub warnings: Vec<Warning>,
}

pub fn projection_dimension(k: usize, alpha: f64, constant: f64) -> usize {
    let l = (k as f64 / alpha).ln().max(1.0);
    (constant * l / (alpha * alpha)).ceil().max(1.0) as usize
}

pub fn sample_size(k: usize, alpha: f64, constant: f64) -> usize {
    let l = (k as f64 / alpha).ln().max(1.0);
    let s = (constant * l * l / alpha.powi(4)).ceil();
    if s >= usize::MAX as f64 {
        usize::MAX
    } else {
        s.max(1.0) as usize
    }
}

/// For the `k` most frequent predicted labels (ties to the smaller label),
/// sample points of that label uniformly without replacement and return a
/// `(1 + α/4)`-approximate geometric median of the sample, in the original
/// space.
pub fn kmedian_cluster(
    points: &PointSet,
    predicted: &LabelAssignment,
    k: usize,
    alpha: f64,
    rng: RngStream,
) -> Result<KMedianOutput> {
    kmedian_cluster_with(points, predicted, k, alpha, rng, &KMedianConfig::default())
}

pub fn kmedian_cluster_with(
    points: &PointSet,
    predicted: &LabelAssignment,
    k: usize,
    alpha: f64,
    rng: RngStream,
    config: &KMedianConfig,
) -> Result<KMedianOutput> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if k == 0 {
        return Err(invalid("k", "must be >= 1"));
    }
    predicted.validate_complete(points.n(), k)?;
    let classes = predicted.classes(k);
    let mut order: Vec<usize> = (0..k).filter(|&l| !classes[l].is_empty()).collect();
    order.sort_by(|&a, &b| classes[b].len().cmp(&classes[a].len()).then(a.cmp(&b)));
    let mut warnings = Vec::new();
    if order.len() < k {
        warnings.push(Warning::MissingLabels { present: order.len(), k });
    }
    if order.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let cap = sample_size(k, alpha, config.sample_constant);
    let eps = alpha / 4.0;
    let medians: Vec<(Vec<f64>, usize)> = order
        .par_iter()
        .map(|&label| {
            let members = &classes[label];
            let take = cap.min(members.len());
            let chosen: Vec<usize> = if take == members.len() {
                members.clone()
            } else {
                let mut idx = sample_indices(&mut rng.child(label as u64).rng(), members.len(), take).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|t| members[t]).collect()
            };
            let sub = points.select(&chosen)?;
            Ok((geometric_median(&sub, eps)?, take))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = medians.iter().map(|(m, _)| m.clone()).collect();
    let centers = CenterSet::from_rows(&rows)?;

    let target = projection_dimension(k, alpha, config.projection_constant);
    let projection = if target < points.d() {
        build_projection(points.d(), target, rng.phase("projection"))?
    } else {
        Projection::identity(points.d())
    };
    let projected_cost = if config.project {
        let pp = projection.apply_points(points)?;
        let pc = projection.apply_centers(&centers)?;
        Some(cost_kmedian(&pp, &pc)?)
    } else {
        None
    };
    Ok(KMedianOutput {
        centers,
        center_labels: order,
        sample_sizes: medians.iter().map(|(_, s)| *s).collect(),
        projected_dim: projection.out_dim(),
        projected_cost,
        warnings,
    })
}
