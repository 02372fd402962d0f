//! Reference algorithms: kmeans++ seeding, Lloyd iterations, and the
//! random-sampling baseline that averages a subsample of each predicted class.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{
    assign_nearest, assign_with_cost, class_centroids, cost_kmeans, sq_dist, CenterSet, LabelAssignment, PointSet,
};
use crate::learned::fill_empty_classes;
use crate::rng::RngStream;
use crate::sum::BLOCK;
use crate::warning::Warning;

/// D² seeding: the first center is a uniform point, each next one a point
/// drawn with probability proportional to its squared distance to the
/// centers chosen so far. If every remaining point coincides with a chosen
/// center, the next center is a uniform draw among the unchosen points.
pub fn kmeanspp_seed(points: &PointSet, k: usize, rng: RngStream) -> Result<CenterSet> {
    let n = points.n();
    if k == 0 || k > n {
        return Err(invalid("k", format!("must lie in 1..={n}, got {k}")));
    }
    let mut r = rng.rng();
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = r.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut d2: Vec<f64> = (0..n)
        .into_par_iter()
        .with_min_len(BLOCK)
        .map(|i| sq_dist(points.row(i), points.row(first)))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = r.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` just above the running sum.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap_or(0))
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[r.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        let c = points.row(next);
        d2.par_iter_mut().with_min_len(BLOCK).enumerate().for_each(|(i, w)| {
            let dd = sq_dist(points.row(i), c);
            if dd < *w {
                *w = dd;
            }
        });
    }
    Ok(points.select(&chosen)?.into())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydConfig {
    pub max_iters: usize,
    /// Stop when the relative cost improvement falls below this.
    pub tol: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydOutput {
    pub centers: CenterSet,
    /// Update steps performed.
    pub iterations: usize,
    /// k-means cost of the initial centers followed by the cost after each step.
    pub costs: Vec<f64>,
    /// Number of times an empty cluster was re-seeded.
    pub reseeds: usize,
}

/// Lloyd's algorithm: alternate nearest-center assignment and centroid
/// updates. A cluster that loses all its points is moved onto the point
/// farthest from its current center, which cannot raise the cost.
pub fn lloyd(points: &PointSet, init: &CenterSet, config: LloydConfig) -> Result<LloydOutput> {
    let mut centers = init.clone();
    let (mut labels, mut cost) = assign_with_cost(points, &centers)?;
    let mut costs = vec![cost];
    let mut iterations = 0;
    let mut reseeds = 0;
    let k = centers.k();
    while iterations < config.max_iters {
        let cents = class_centroids(points, &labels, k)?;
        let mut values = Vec::with_capacity(k * points.d());
        let mut used: Vec<usize> = Vec::new();
        for c in &cents {
            match c {
                Some(c) => values.extend_from_slice(c),
                None => {
                    reseeds += 1;
                    let far = farthest_from_assigned(points, &centers, &labels, &used);
                    used.push(far);
                    values.extend_from_slice(points.row(far));
                }
            }
        }
        let next = CenterSet::new(points.d(), values)?;
        let (next_labels, next_cost) = assign_with_cost(points, &next)?;
        iterations += 1;
        costs.push(next_cost);
        let improved = cost - next_cost;
        centers = next;
        labels = next_labels;
        if cost == 0.0 || improved <= config.tol * cost {
            break;
        }
        cost = next_cost;
    }
    Ok(LloydOutput {
        centers,
        iterations,
        costs,
        reseeds,
    })
}

fn farthest_from_assigned(points: &PointSet, centers: &CenterSet, labels: &LabelAssignment, skip: &[usize]) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in points.rows().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        let l = labels.get(i).unwrap_or(0);
        let dd = sq_dist(p, centers.row(l));
        if dd > best.1 {
            best = (i, dd);
        }
    }
    best.0
}

/// Default subsampling rates for [`random_sampling_baseline`].
pub const DEFAULT_Q_GRID: [f64; 8] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingOutput {
    pub q: f64,
    pub centers: CenterSet,
    pub cost: f64,
    pub warnings: Vec<Warning>,
    /// `(q, cost)` for each rate tried.
    pub trace: Vec<(f64, f64)>,
}

/// Centers from the per-class means of the predicted classes, without any
/// outlier handling. Empty classes fall back to farthest points.
pub fn predicted_centroids(points: &PointSet, labels: &LabelAssignment, k: usize) -> Result<(CenterSet, Vec<Warning>)> {
    let cents = class_centroids(points, labels, k)?;
    fill_empty_classes(points, cents)
}

/// For every rate `q`, keep each labeled point with probability `q`, use the
/// per-class means of the kept points as centers, and score them on the full
/// point set. Returns the best rate; ties go to the earlier grid entry.
pub fn random_sampling_baseline(
    points: &PointSet,
    labels: &LabelAssignment,
    k: usize,
    q_grid: &[f64],
    rng: RngStream,
) -> Result<SamplingOutput> {
    labels.validate_complete(points.n(), k)?;
    if q_grid.is_empty() {
        return Err(invalid("q_grid", "is empty"));
    }
    if let Some(q) = q_grid.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
        return Err(invalid("q_grid", format!("rates must lie in (0, 1], got {q}")));
    }
    let mut best: Option<SamplingOutput> = None;
    let mut trace = Vec::new();
    for (t, &q) in q_grid.iter().enumerate() {
        let mut r = rng.child(t as u64).rng();
        let kept: Vec<Option<usize>> = labels
            .as_slice()
            .iter()
            .map(|&l| if q >= 1.0 || r.random::<f64>() < q { l } else { None })
            .collect();
        let (centers, warnings) = predicted_centroids(points, &LabelAssignment::new(kept), k)?;
        let cost = cost_kmeans(points, &centers)?;
        trace.push((q, cost));
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(SamplingOutput {
                q,
                centers,
                cost,
                warnings,
                trace: Vec::new(),
            });
        }
    }
    let mut best = best.expect("grid is non-empty");
    best.trace = trace;
    Ok(best)
}

/// kmeans++ centers for each of `trials` derived streams, with their costs.
pub fn kmeanspp_trials(points: &PointSet, k: usize, trials: usize, rng: RngStream) -> Result<Vec<(CenterSet, f64)>> {
    (0..trials)
        .map(|t| {
            let c = kmeanspp_seed(points, k, rng.child(t as u64))?;
            let cost = cost_kmeans(points, &c)?;
            Ok((c, cost))
        })
        .collect()
}

/// Nearest-center labels for the kmeans++ centers; convenience for callers
/// that only need the induced partition.
pub fn kmeanspp_labels(points: &PointSet, k: usize, rng: RngStream) -> Result<LabelAssignment> {
    let c = kmeanspp_seed(points, k, rng)?;
    assign_nearest(points, &c)
}
