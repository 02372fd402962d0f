//! Learning-augmented k-means: robust per-class, per-coordinate center
//! estimation from predicted labels, and selection of `α` over a grid.

use rayon::prelude::*;

use crate::crd_est::SplitSample;
use crate::error::{invalid, Error, Result};
use crate::geometry::{cost_kmeans, sq_dist, CenterSet, LabelAssignment, PointSet};
use crate::rng::RngStream;
use crate::warning::Warning;

/// Upper end of the admissible `α` range. The training window keeps a
/// `1 - 5α` fraction, which must stay positive.
pub const ALPHA_LIMIT: f64 = 0.2;

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < ALPHA_LIMIT {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must lie in (0, {ALPHA_LIMIT}), got {alpha}")))
    }
}

/// Evenly spaced `α` candidates `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    lo: f64,
    hi: f64,
    step: f64,
}

impl AlphaGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        check_alpha(lo)?;
        check_alpha(hi)?;
        if lo > hi {
            return Err(invalid("alpha grid", format!("lo {lo} exceeds hi {hi}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("alpha grid", format!("step must be positive, got {step}")));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn single(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha, 1.0)
    }

    pub fn values(&self) -> Vec<f64> {
        let steps = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| {
                let a = self.lo + i as f64 * self.step;
                (a * 1e12).round() / 1e12
            })
            .collect()
    }
}

impl Default for AlphaGrid {
    /// `0.01, 0.02, ..., 0.15`.
    fn default() -> Self {
        Self {
            lo: 0.01,
            hi: 0.15,
            step: 0.01,
        }
    }
}

/// Centers produced by the robust estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedCenters {
    pub centers: CenterSet,
    pub alpha: f64,
    pub warnings: Vec<Warning>,
}

/// Random halvings of every (class, coordinate) column, computed once so that
/// any number of `α` values can be evaluated cheaply.
///
/// The stream for a column is keyed by the smallest point index in the class
/// and the coordinate, not by the label's name, so renaming labels permutes
/// the output centers and changes nothing else.
#[derive(Debug, Clone)]
pub struct PreparedClasses {
    k: usize,
    d: usize,
    classes: Vec<Option<Vec<SplitSample>>>,
}

const TRANSPOSE_BLOCK: usize = 32;

impl PreparedClasses {
    pub fn new(points: &PointSet, predicted: &LabelAssignment, k: usize, rng: RngStream) -> Result<Self> {
        Self::build(points, predicted, k, rng, None)
    }

    /// Same halvings as [`new`](Self::new), with only the work needed for
    /// `α <= max_alpha` done up front. Centers are identical for every `α`.
    pub fn with_max_alpha(
        points: &PointSet,
        predicted: &LabelAssignment,
        k: usize,
        max_alpha: f64,
        rng: RngStream,
    ) -> Result<Self> {
        check_alpha(max_alpha)?;
        Self::build(points, predicted, k, rng, Some(max_alpha))
    }

    fn build(
        points: &PointSet,
        predicted: &LabelAssignment,
        k: usize,
        rng: RngStream,
        max_alpha: Option<f64>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "must be >= 1"));
        }
        predicted.validate_complete(points.n(), k)?;
        let d = points.d();
        let classes = predicted
            .classes(k)
            .iter()
            .map(|members| {
                if members.is_empty() {
                    return None;
                }
                let key = members[0] as u64 * d as u64;
                Some(split_columns(points, members, key, rng, max_alpha))
            })
            .collect();
        Ok(Self { k, d, classes })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Estimated centers at one `α`, with empty classes filled by the
    /// farthest-point rule.
    pub fn centers(&self, points: &PointSet, alpha: f64) -> Result<LearnedCenters> {
        check_alpha(alpha)?;
        let partial: Vec<Option<Vec<f64>>> = self
            .classes
            .iter()
            .map(|c| {
                c.as_ref()
                    .map(|cols| cols.iter().map(|s| s.estimate(alpha).value).collect())
            })
            .collect();
        let (centers, warnings) = fill_empty_classes(points, partial)?;
        debug_assert_eq!(centers.d(), self.d);
        Ok(LearnedCenters {
            centers,
            alpha,
            warnings,
        })
    }
}

/// Transpose a class into coordinate columns, a block of columns at a time,
/// and halve each column with its own stream.
fn split_columns(
    points: &PointSet,
    members: &[usize],
    key: u64,
    rng: RngStream,
    max_alpha: Option<f64>,
) -> Vec<SplitSample> {
    let d = points.d();
    let starts: Vec<usize> = (0..d).step_by(TRANSPOSE_BLOCK).collect();
    let blocks: Vec<Vec<SplitSample>> = starts
        .into_par_iter()
        .map(|start| {
            let end = (start + TRANSPOSE_BLOCK).min(d);
            let mut cols: Vec<Vec<f64>> = (start..end).map(|_| Vec::with_capacity(members.len())).collect();
            for &i in members {
                for (col, &v) in cols.iter_mut().zip(&points.row(i)[start..end]) {
                    col.push(v);
                }
            }
            cols.into_iter()
                .zip(start..end)
                .map(|(col, j)| SplitSample::from_vec(col, rng.child(key + j as u64), max_alpha))
                .collect()
        })
        .collect();
    blocks.into_iter().flatten().collect()
}

/// Turn per-class centers (some missing) into a full center set. Each missing
/// class gets the point farthest from all centers chosen so far, in label order.
pub(crate) fn fill_empty_classes(
    points: &PointSet,
    partial: Vec<Option<Vec<f64>>>,
) -> Result<(CenterSet, Vec<Warning>)> {
    let d = points.d();
    let mut warnings = Vec::new();
    let mut chosen: Vec<Vec<f64>> = partial.iter().flatten().cloned().collect();
    let mut rows = Vec::with_capacity(partial.len());
    for (label, c) in partial.into_iter().enumerate() {
        match c {
            Some(c) => rows.push(c),
            None => {
                let far = farthest_point(points, &chosen);
                let row = points.row(far).to_vec();
                chosen.push(row.clone());
                rows.push(row);
                warnings.push(Warning::EmptyClass { label });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let mut values = Vec::with_capacity(rows.len() * d);
    for r in &rows {
        values.extend_from_slice(r);
    }
    Ok((CenterSet::new(d, values)?, warnings))
}

fn farthest_point(points: &PointSet, centers: &[Vec<f64>]) -> usize {
    if centers.is_empty() {
        return 0;
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in points.rows().enumerate() {
        let dd = centers.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min);
        if dd > best.1 {
            best = (i, dd);
        }
    }
    best.0
}

/// Run the robust estimator on every coordinate of every predicted class.
///
/// `predicted` must label every point with a value below `k`. Classes that
/// never occur get a farthest-point center and an [`Warning::EmptyClass`].
pub fn cluster_with_predictor(
    points: &PointSet,
    predicted: &LabelAssignment,
    k: usize,
    alpha: f64,
    rng: RngStream,
) -> Result<LearnedCenters> {
    check_alpha(alpha)?;
    PreparedClasses::with_max_alpha(points, predicted, k, alpha, rng)?.centers(points, alpha)
}

/// Outcome of a grid search over `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSelection {
    pub alpha: f64,
    pub centers: CenterSet,
    pub cost: f64,
    pub warnings: Vec<Warning>,
    /// `(α, k-means cost)` for every grid value, in grid order.
    pub trace: Vec<(f64, f64)>,
}

/// Evaluate every grid `α` with the same random halvings and keep the centers
/// with the lowest k-means cost on all points. Ties go to the smaller `α`.
pub fn select_alpha(
    points: &PointSet,
    predicted: &LabelAssignment,
    k: usize,
    grid: &AlphaGrid,
    rng: RngStream,
) -> Result<AlphaSelection> {
    let max_alpha = grid.values().into_iter().fold(f64::NAN, f64::max);
    if max_alpha.is_nan() {
        return Err(invalid("alpha grid", "is empty"));
    }
    let prepared = PreparedClasses::with_max_alpha(points, predicted, k, max_alpha, rng)?;
    let mut best: Option<AlphaSelection> = None;
    let mut trace = Vec::new();
    let mut last: Option<(CenterSet, f64)> = None;
    for alpha in grid.values() {
        let out = prepared.centers(points, alpha)?;
        // Neighbouring α values often produce bit-identical centers.
        let cost = match &last {
            Some((c, cost)) if *c == out.centers => *cost,
            _ => cost_kmeans(points, &out.centers)?,
        };
        last = Some((out.centers.clone(), cost));
        trace.push((alpha, cost));
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(AlphaSelection {
                alpha,
                centers: out.centers,
                cost,
                warnings: out.warnings,
                trace: Vec::new(),
            });
        }
    }
    let mut best = best.ok_or_else(|| invalid("alpha grid", "is empty"))?;
    best.trace = trace;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cost_kmeans;

    fn two_clusters() -> (PointSet, LabelAssignment) {
        let mut v = vec![0.0; 50];
        v.extend(vec![100.0; 50]);
        let labels = (0..100).map(|i| usize::from(i >= 50)).collect();
        (PointSet::new(1, v).unwrap(), LabelAssignment::complete(labels))
    }

    #[test]
    fn grid_values() {
        let g = AlphaGrid::default().values();
        assert_eq!(g.len(), 15);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[5], 0.06);
        assert_eq!(g[14], 0.15);
        assert_eq!(AlphaGrid::single(0.05).unwrap().values(), vec![0.05]);
        assert!(AlphaGrid::new(0.1, 0.05, 0.01).is_err());
        assert!(AlphaGrid::new(0.0, 0.05, 0.01).is_err());
        assert!(AlphaGrid::new(0.01, 0.05, 0.0).is_err());
    }

    #[test]
    fn alpha_range() {
        assert!(check_alpha(0.05).is_ok());
        assert!(check_alpha(0.15).is_ok());
        assert!(check_alpha(0.0).is_err());
        assert!(check_alpha(0.2).is_err());
        assert!(check_alpha(f64::NAN).is_err());
    }

    #[test]
    fn perfect_predictor_recovers_exact_centers() {
        let (p, l) = two_clusters();
        let out = cluster_with_predictor(&p, &l, 2, 0.05, RngStream::new(1)).unwrap();
        assert_eq!(out.centers.values(), &[0.0, 100.0]);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn flipped_labels_stay_close_to_optimal() {
        let (p, l) = two_clusters();
        let opt = cost_kmeans(&p, &CenterSet::new(1, vec![0.0, 100.0]).unwrap()).unwrap();
        for seed in 0..20u64 {
            let mut labels = l.clone().into_inner();
            // flip 10% of each class
            for i in (0..100).filter(|i| (i * 7 + seed as usize) % 10 == 0) {
                labels[i] = labels[i].map(|x| 1 - x);
            }
            let out = cluster_with_predictor(&p, &LabelAssignment::new(labels), 2, 0.05, RngStream::new(seed)).unwrap();
            let c = cost_kmeans(&p, &out.centers).unwrap();
            assert!(c <= 1.2 * opt, "seed {seed}: cost {c}");
        }
    }

    #[test]
    fn errors_on_bad_labels() {
        let (p, _) = two_clusters();
        let bad = LabelAssignment::complete(vec![2; 100]);
        assert!(matches!(
            cluster_with_predictor(&p, &bad, 2, 0.05, RngStream::new(0)),
            Err(Error::LabelOutOfRange { .. })
        ));
        let mut partial = vec![Some(0); 100];
        partial[3] = None;
        assert!(matches!(
            cluster_with_predictor(&p, &LabelAssignment::new(partial), 2, 0.05, RngStream::new(0)),
            Err(Error::MissingLabel { index: 3 })
        ));
        let (p, l) = two_clusters();
        assert!(cluster_with_predictor(&p, &l, 2, 0.25, RngStream::new(0)).is_err());
    }

    #[test]
    fn empty_class_gets_farthest_point() {
        let (p, l) = two_clusters();
        let labels: Vec<usize> = l.as_slice().iter().map(|x| x.unwrap() * 2).collect();
        let out = cluster_with_predictor(&p, &LabelAssignment::complete(labels), 3, 0.05, RngStream::new(0)).unwrap();
        assert_eq!(out.warnings, vec![Warning::EmptyClass { label: 1 }]);
        assert_eq!(out.centers.k(), 3);
        assert_eq!(out.centers.values(), &[0.0, 0.0, 100.0]);
    }

    #[test]
    fn select_alpha_ties_to_smallest() {
        let (p, l) = two_clusters();
        let sel = select_alpha(&p, &l, 2, &AlphaGrid::default(), RngStream::new(4)).unwrap();
        assert_eq!(sel.alpha, 0.01);
        assert_eq!(sel.cost, 0.0);
        assert_eq!(sel.trace.len(), 15);
    }

    #[test]
    fn single_value_grid_matches_direct_call() {
        let (p, l) = two_clusters();
        let mut labels = l.into_inner();
        labels[0] = Some(1);
        labels[99] = Some(0);
        let l = LabelAssignment::new(labels);
        let sel = select_alpha(&p, &l, 2, &AlphaGrid::single(0.07).unwrap(), RngStream::new(9)).unwrap();
        let direct = cluster_with_predictor(&p, &l, 2, 0.07, RngStream::new(9)).unwrap();
        assert_eq!(sel.centers, direct.centers);
        assert_eq!(sel.alpha, 0.07);
    }
}
