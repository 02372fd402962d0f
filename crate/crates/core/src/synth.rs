//! Synthetic instances: the kmeans++ lower-bound construction and planted
//! Gaussian mixtures.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::geometry::{CenterSet, LabelAssignment, PointSet};
use crate::rng::RngStream;

/// The lower-bound instance together with its known optimum.
#[derive(Debug, Clone)]
pub struct LowerBoundInstance {
    pub points: PointSet,
    pub labels: LabelAssignment,
    /// Centroid of each group; the optimal centers.
    pub centers: CenterSet,
    pub optimal_cost: f64,
    pub k: usize,
    pub d: usize,
    pub scale: f64,
}

/// Groups `i = 0..k`, each holding `scale·e_i` and `scale·e_i + e_j` for every
/// `j = 0..d`, with a single shared basis (so `(scale + 1)·e_i` is a point).
///
/// Group `i` has `d + 1` points whose centroid is `scale·e_i + (1/(d+1))·Σ e_j`.
/// Every point is at squared distance 1 from `scale·e_i` except `scale·e_i`
/// itself, so the group cost is `d − (d+1)·d/(d+1)² = d²/(d+1)`.
pub fn lower_bound_instance(k: usize, d: usize, scale: f64) -> Result<LowerBoundInstance> {
    if k == 0 || d == 0 {
        return Err(invalid("k/d", "must be >= 1"));
    }
    if k > d {
        return Err(invalid("k", format!("must not exceed d={d}, got {k}")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(invalid("scale", format!("must be positive, got {scale}")));
    }
    let group = d + 1;
    let n = k * group;
    let mut values = vec![0.0; n * d];
    let mut labels = Vec::with_capacity(n);
    for i in 0..k {
        for t in 0..group {
            let row = &mut values[(i * group + t) * d..(i * group + t + 1) * d];
            row[i] = scale;
            if t > 0 {
                row[t - 1] += 1.0;
            }
            labels.push(i);
        }
    }
    let off = 1.0 / group as f64;
    let mut centers = vec![off; k * d];
    for i in 0..k {
        centers[i * d + i] += scale;
    }
    let df = d as f64;
    let optimal_cost = k as f64 * df * df / (df + 1.0);
    Ok(LowerBoundInstance {
        points: PointSet::new(d, values)?,
        labels: LabelAssignment::complete(labels),
        centers: CenterSet::new(d, centers)?,
        optimal_cost,
        k,
        d,
        scale,
    })
}

/// A Gaussian mixture with known generating centers.
#[derive(Debug, Clone)]
pub struct PlantedMixture {
    pub points: PointSet,
    pub labels: LabelAssignment,
    pub centers: CenterSet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureConfig {
    pub k: usize,
    pub d: usize,
    pub n_per_cluster: usize,
    /// Minimum distance between generating centers.
    pub separation: f64,
    /// Per-coordinate standard deviation of the points around their center.
    pub noise_sigma: f64,
}

/// Centers are `separation · g` with `g` standard normal, redrawn (up to a
/// bounded number of attempts) until all pairs are at least `separation`
/// apart. Points are listed cluster by cluster.
pub fn planted_mixture(config: MixtureConfig, rng: RngStream) -> Result<PlantedMixture> {
    let MixtureConfig {
        k,
        d,
        n_per_cluster,
        separation,
        noise_sigma,
    } = config;
    if k == 0 || d == 0 || n_per_cluster == 0 {
        return Err(invalid("mixture", "k, d and n_per_cluster must be >= 1"));
    }
    if !(separation.is_finite() && separation > 0.0) {
        return Err(invalid("separation", format!("must be positive, got {separation}")));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(invalid("noise_sigma", format!("must be non-negative, got {noise_sigma}")));
    }
    let mut r = rng.phase("centers").rng();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut attempts = 0;
    while centers.len() < k {
        let c: Vec<f64> = (0..d)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut r);
                separation * z
            })
            .collect();
        attempts += 1;
        let far_enough = centers
            .iter()
            .all(|o| crate::geometry::dist(o, &c) >= separation);
        if far_enough || attempts > 1000 * k {
            centers.push(c);
        }
    }
    let mut r = rng.phase("points").rng();
    let mut values = Vec::with_capacity(k * n_per_cluster * d);
    let mut labels = Vec::with_capacity(k * n_per_cluster);
    for (i, c) in centers.iter().enumerate() {
        for _ in 0..n_per_cluster {
            for &cj in c {
                let z: f64 = StandardNormal.sample(&mut r);
                values.push(cj + noise_sigma * z);
            }
            labels.push(i);
        }
    }
    Ok(PlantedMixture {
        points: PointSet::new(d, values)?,
        labels: LabelAssignment::complete(labels),
        centers: CenterSet::from_rows(&centers)?,
    })
}
