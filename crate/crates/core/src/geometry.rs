//! Point sets, center sets, labels and the clustering objectives.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{compensated_sum, par_sum, CompensatedSum, BLOCK};

fn check_matrix(d: usize, values: &[f64]) -> Result<usize> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if values.len() % d != 0 {
        return Err(Error::RaggedMatrix {
            values: values.len(),
            d,
        });
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / d,
            col: pos % d,
        });
    }
    Ok(values.len() / d)
}

fn rows_to_flat(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let d = rows.first().map_or(0, Vec::len);
    let mut values = Vec::with_capacity(rows.len() * d);
    for r in rows {
        if r.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        values.extend_from_slice(r);
    }
    Ok((d, values))
}

/// Dense row-major set of `n` points in `d` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl PointSet {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        let n = check_matrix(d, &values)?;
        if n == 0 {
            return Err(Error::EmptyPoints);
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyPoints);
        }
        let (d, values) = rows_to_flat(rows)?;
        Self::new(d, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.d)
    }

    /// New point set holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(Error::IndexOutOfRange { index: i, len: self.n });
            }
            values.extend_from_slice(self.row(i));
        }
        Ok(Self {
            n: indices.len(),
            d: self.d,
            values,
        })
    }
}

/// `k` cluster centers in `d` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CenterSet {
    k: usize,
    d: usize,
    values: Vec<f64>,
}

impl CenterSet {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        let k = check_matrix(d, &values)?;
        if k == 0 {
            return Err(Error::EmptyCenters);
        }
        Ok(Self { k, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyCenters);
        }
        let (d, values) = rows_to_flat(rows)?;
        Self::new(d, values)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.d..(j + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.d)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn as_points(&self) -> PointSet {
        PointSet {
            n: self.k,
            d: self.d,
            values: self.values.clone(),
        }
    }
}

impl From<PointSet> for CenterSet {
    fn from(p: PointSet) -> Self {
        Self {
            k: p.n,
            d: p.d,
            values: p.values,
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for CenterSet {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<CenterSet> for Vec<Vec<f64>> {
    fn from(c: CenterSet) -> Self {
        c.to_rows()
    }
}

/// Per-point cluster label; `None` marks an unlabeled (deleted) point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAssignment {
    labels: Vec<Option<usize>>,
}

impl LabelAssignment {
    pub fn new(labels: Vec<Option<usize>>) -> Self {
        Self { labels }
    }

    pub fn complete(labels: Vec<usize>) -> Self {
        Self {
            labels: labels.into_iter().map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn into_inner(self) -> Vec<Option<usize>> {
        self.labels
    }

    pub fn is_complete(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Check length against `n` and every present label against `k`.
    pub fn validate(&self, n: usize, k: usize) -> Result<()> {
        if self.labels.len() != n {
            return Err(Error::LengthMismatch {
                labels: self.labels.len(),
                points: n,
            });
        }
        for (index, l) in self.labels.iter().enumerate() {
            if let Some(label) = *l {
                if label >= k {
                    return Err(Error::LabelOutOfRange { index, label, k });
                }
            }
        }
        Ok(())
    }

    /// As [`validate`](Self::validate), additionally rejecting unlabeled points.
    pub fn validate_complete(&self, n: usize, k: usize) -> Result<()> {
        self.validate(n, k)?;
        if let Some(index) = self.labels.iter().position(Option::is_none) {
            return Err(Error::MissingLabel { index });
        }
        Ok(())
    }

    /// Member indices of each class `0..k`, ascending. Unlabeled points are skipped.
    pub fn classes(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); k];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(label) = *l {
                if label < k {
                    out[label].push(i);
                }
            }
        }
        out
    }
}

/// Squared Euclidean distance. Eight independent accumulators let the
/// compiler vectorize; the summation order is fixed, so results are
/// reproducible.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist_until(a, b, f64::INFINITY)
}

/// [`sq_dist`], except that it may stop early and return some partial sum
/// once that exceeds `bound`. Whenever the true distance is `<= bound` the
/// result is exactly [`sq_dist`]: partial sums of non-negative terms never
/// decrease under rounding, so an early exit only happens above `bound`.
#[inline]
fn sq_dist_until(a: &[f64], b: &[f64], bound: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    const LANES: usize = 8;
    const CHECK_EVERY: usize = 2;
    let combine = |acc: &[f64; LANES]| ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    let mut acc = [0.0f64; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    for (t, (x, y)) in ca.zip(cb).enumerate() {
        for l in 0..LANES {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
        if t % CHECK_EVERY == CHECK_EVERY - 1 {
            let partial = combine(&acc);
            if partial > bound {
                return partial;
            }
        }
    }
    combine(&acc) + tail
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// Index and squared distance of the nearest center; ties go to the smaller index.
#[inline]
pub fn nearest(p: &[f64], centers: &CenterSet) -> (usize, f64) {
    nearest_from(p, centers, 0)
}

/// [`nearest`], trying center `hint` first. A good hint lets every other
/// center be abandoned after a few coordinates; the answer never depends on it.
#[inline]
fn nearest_from(p: &[f64], centers: &CenterSet, hint: usize) -> (usize, f64) {
    if centers.k() == 0 {
        return (0, f64::INFINITY);
    }
    let hint = hint.min(centers.k() - 1);
    let mut best = (hint, sq_dist(p, centers.row(hint)));
    for (j, c) in centers.rows().enumerate() {
        if j == hint {
            continue;
        }
        let dd = sq_dist_until(p, c, best.1);
        if dd < best.1 || (dd == best.1 && j < best.0) {
            best = (j, dd);
        }
    }
    best
}

/// Run `f` over each fixed block of points with the nearest center of every
/// point, using the previous point's answer as the hint (neighbouring rows
/// often share a cluster).
fn map_blocks<T, F>(points: &PointSet, centers: &CenterSet, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut dyn Iterator<Item = (usize, f64)>) -> T + Sync,
{
    let n = points.n();
    (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut hint = 0;
            let mut it = (b * BLOCK..((b + 1) * BLOCK).min(n)).map(|i| {
                let r = nearest_from(points.row(i), centers, hint);
                hint = r.0;
                r
            });
            f(&mut it)
        })
        .collect()
}

fn check_dims(points: &PointSet, centers: &CenterSet) -> Result<()> {
    if centers.k() == 0 {
        return Err(Error::EmptyCenters);
    }
    if points.d() != centers.d() {
        return Err(Error::DimensionMismatch {
            expected: points.d(),
            got: centers.d(),
        });
    }
    Ok(())
}

/// k-means objective: sum over points of the squared distance to the nearest center.
pub fn cost_kmeans(points: &PointSet, centers: &CenterSet) -> Result<f64> {
    check_dims(points, centers)?;
    Ok(compensated_sum(map_blocks(points, centers, |it| compensated_sum(it.map(|r| r.1)))))
}

/// k-median objective: sum over points of the distance to the nearest center.
pub fn cost_kmedian(points: &PointSet, centers: &CenterSet) -> Result<f64> {
    check_dims(points, centers)?;
    Ok(compensated_sum(map_blocks(points, centers, |it| compensated_sum(it.map(|r| r.1.sqrt())))))
}

/// Nearest-center labels together with the k-means cost, in one pass. The
/// cost is bit-identical to [`cost_kmeans`].
pub fn assign_with_cost(points: &PointSet, centers: &CenterSet) -> Result<(LabelAssignment, f64)> {
    check_dims(points, centers)?;
    let blocks = map_blocks(points, centers, |it| {
        let mut labels = Vec::with_capacity(BLOCK);
        let cost = compensated_sum(it.map(|(j, dd)| {
            labels.push(Some(j));
            dd
        }));
        (labels, cost)
    });
    let cost = compensated_sum(blocks.iter().map(|b| b.1));
    let labels = blocks.into_iter().flat_map(|b| b.0).collect();
    Ok((LabelAssignment::new(labels), cost))
}

pub fn assign_nearest(points: &PointSet, centers: &CenterSet) -> Result<LabelAssignment> {
    check_dims(points, centers)?;
    let blocks = map_blocks(points, centers, |it| it.map(|(j, _)| Some(j)).collect::<Vec<_>>());
    Ok(LabelAssignment::new(blocks.into_iter().flatten().collect()))
}

/// Coordinate-wise mean of the listed points.
pub fn centroid(points: &PointSet, subset: &[usize]) -> Result<Vec<f64>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let d = points.d();
    let mut acc = vec![CompensatedSum::new(); d];
    for &i in subset {
        if i >= points.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: points.n(),
            });
        }
        for (a, &v) in acc.iter_mut().zip(points.row(i)) {
            a.add(v);
        }
    }
    let m = subset.len() as f64;
    Ok(acc.iter().map(|a| a.value() / m).collect())
}

/// Centroid of each class, `None` for classes with no labeled member.
pub fn class_centroids(points: &PointSet, labels: &LabelAssignment, k: usize) -> Result<Vec<Option<Vec<f64>>>> {
    labels.validate(points.n(), k)?;
    labels
        .classes(k)
        .par_iter()
        .map(|members| {
            if members.is_empty() {
                Ok(None)
            } else {
                centroid(points, members).map(Some)
            }
        })
        .collect()
}

/// Cost of a fixed assignment: each point pays the squared distance to the
/// center its label names.
pub fn assignment_cost(points: &PointSet, centers: &CenterSet, labels: &LabelAssignment) -> Result<f64> {
    check_dims(points, centers)?;
    labels.validate_complete(points.n(), centers.k())?;
    Ok(par_sum(points.n(), |i| {
        let l = labels.get(i).unwrap_or_default();
        sq_dist(points.row(i), centers.row(l))
    }))
}

/// k-means cost of a partition with every class served by its own centroid.
pub fn partition_cost(points: &PointSet, labels: &LabelAssignment, k: usize) -> Result<f64> {
    labels.validate_complete(points.n(), k)?;
    let cents = class_centroids(points, labels, k)?;
    Ok(par_sum(points.n(), |i| {
        let l = labels.get(i).unwrap_or_default();
        cents[l].as_deref().map_or(0.0, |c| sq_dist(points.row(i), c))
    }))
}
