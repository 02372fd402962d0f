//! One-dimensional robust center estimation.
//!
//! The values are split uniformly at random into a training half and a test
//! half. On the sorted training half we find the shortest window holding a
//! `1 - 5α` fraction of it, then return the mean of the test values that fall
//! inside that window. Outliers planted by a noisy labeling sit far from the
//! bulk, so they cannot be inside the shortest window once the clean points
//! outnumber them.

use std::cmp::Ordering;

use rand::seq::SliceRandom;

use crate::error::{invalid, Result};
use crate::rng::RngStream;
use crate::sum::CompensatedSum;

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Shortest window `[v[i], v[i + count - 1]]` of an ascending slice. Among
/// windows of equal width the leftmost wins.
pub fn shortest_interval(sorted: &[f64], count: usize) -> Result<Interval> {
    if count == 0 || count > sorted.len() {
        return Err(invalid(
            "count",
            format!("must lie in 1..={}, got {count}", sorted.len()),
        ));
    }
    let span = count - 1;
    let mut best = 0;
    let mut best_width = sorted[span] - sorted[0];
    for i in 1..sorted.len() - span {
        let w = sorted[i + span] - sorted[i];
        if w < best_width {
            best = i;
            best_width = w;
        }
    }
    Ok(Interval {
        lo: sorted[best],
        hi: sorted[best + span],
    })
}

/// Number of training values the window must cover: `ceil(m(1 - 5α))`
/// clamped to `[1, m]`.
pub fn window_count(m: usize, alpha: f64) -> usize {
    let raw = (m as f64 * (1.0 - 5.0 * alpha)).ceil();
    if raw.is_nan() || raw < 1.0 {
        1
    } else {
        (raw as usize).clamp(1, m.max(1))
    }
}

/// Result of one estimate, with the quantities the analysis talks about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub interval: Interval,
    /// Test values inside the interval.
    pub test_inside: usize,
    pub test_len: usize,
}

/// A random halving of a list of values, with the training half ordered.
///
/// Splitting once and estimating for several `α` gives exactly the same
/// answers as calling [`crd_est`] once per `α` with the same stream.
#[derive(Debug, Clone)]
pub struct SplitSample {
    /// The lowest `sorted_tail` and highest `sorted_tail` values sit sorted at
    /// either end; anything between lies between them in value. A window of
    /// `count` values only ever touches the `m − count + 1` values at each end.
    train: Vec<f64>,
    test: Vec<f64>,
    sorted_tail: usize,
}

impl SplitSample {
    /// Random halving: a uniformly random `floor(n/2)` of the values go to
    /// the test half, the remaining `ceil(n/2)` to training.
    pub fn new(values: &[f64], rng: RngStream) -> Self {
        Self::from_vec(values.to_vec(), rng, None)
    }

    /// Like [`new`](Self::new), but only orders as much of the training half
    /// as estimates with `α <= max_alpha` need. Larger `α` still work, at the
    /// price of a sort per call.
    pub(crate) fn from_vec(mut v: Vec<f64>, rng: RngStream, max_alpha: Option<f64>) -> Self {
        // Fisher–Yates run only over the last n/2 slots draws a uniform
        // random test half; the training half is sorted anyway.
        let test_len = v.len() / 2;
        v.partial_shuffle(&mut rng.rng(), test_len);
        let test = v.split_off(v.len() - test_len);
        Self::from_halves(v, test, max_alpha)
    }

    fn from_halves(mut train: Vec<f64>, test: Vec<f64>, max_alpha: Option<f64>) -> Self {
        let m = train.len();
        let tail = match max_alpha {
            Some(a) if m > 0 => m - window_count(m, a) + 1,
            _ => m,
        };
        // `total_cmp` is about twice as slow as a plain comparison, so keep it
        // for data that actually contains NaN.
        let sorted_tail = if train.iter().any(|x| x.is_nan()) {
            order_tails(&mut train, tail, f64::total_cmp)
        } else {
            order_tails(&mut train, tail, |a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        };
        Self { train, test, sorted_tail }
    }

    /// The training half. Fully ascending when built by [`new`](Self::new).
    pub fn train(&self) -> &[f64] {
        &self.train
    }

    pub fn test(&self) -> &[f64] {
        &self.test
    }

    pub fn interval(&self, alpha: f64) -> Interval {
        let m = self.train.len();
        let count = window_count(m, alpha);
        if m - count < self.sorted_tail {
            shortest_interval(&self.train, count).expect("count is clamped into range")
        } else {
            let mut sorted = self.train.clone();
            sorted.sort_unstable_by(f64::total_cmp);
            shortest_interval(&sorted, count).expect("count is clamped into range")
        }
    }

    pub fn estimate(&self, alpha: f64) -> Estimate {
        if self.train.is_empty() {
            return Estimate {
                value: 0.0,
                interval: Interval { lo: 0.0, hi: 0.0 },
                test_inside: 0,
                test_len: 0,
            };
        }
        let interval = self.interval(alpha);
        let (sum, test_inside) = mean_inside(&self.test, interval);
        let value = if test_inside > 0 {
            sum / test_inside as f64
        } else {
            // Nothing from the test half landed in the window: fall back to the
            // training values inside it (never empty), then to everything.
            // Sum in ascending order so the result does not depend on how
            // much of the training half was sorted.
            let mut inside: Vec<f64> = self.train.iter().copied().filter(|&x| interval.contains(x)).collect();
            inside.sort_unstable_by(f64::total_cmp);
            let (s, c) = mean_inside(&inside, interval);
            if c > 0 {
                s / c as f64
            } else {
                let all: CompensatedSum = self.train.iter().chain(&self.test).copied().collect();
                all.value() / (self.train.len() + self.test.len()) as f64
            }
        };
        Estimate {
            value: value.clamp(interval.lo, interval.hi),
            interval,
            test_inside,
            test_len: self.test.len(),
        }
    }
}

/// Sort the `tail` smallest and `tail` largest values into place (or
/// everything, when that is no more work) and return how many were sorted.
fn order_tails<F>(v: &mut [f64], tail: usize, mut cmp: F) -> usize
where
    F: FnMut(&f64, &f64) -> Ordering,
{
    let m = v.len();
    if m == 0 || 2 * tail >= m {
        v.sort_unstable_by(cmp);
        return m;
    }
    v.select_nth_unstable_by(tail - 1, &mut cmp);
    let (low, rest) = v.split_at_mut(tail);
    let mid = rest.len() - tail;
    rest.select_nth_unstable_by(mid, &mut cmp);
    low.sort_unstable_by(&mut cmp);
    rest[mid..].sort_unstable_by(&mut cmp);
    tail
}

fn mean_inside(values: &[f64], interval: Interval) -> (f64, usize) {
    let mut acc = CompensatedSum::new();
    let mut count = 0;
    for &x in values {
        if interval.contains(x) {
            acc.add(x);
            count += 1;
        }
    }
    (acc.value(), count)
}

/// Robust estimate of the center of `values` tolerating an `α` fraction of
/// arbitrary outliers. Returns 0 for an empty list.
pub fn crd_est(values: &[f64], alpha: f64, rng: RngStream) -> f64 {
    crd_est_detailed(values, alpha, rng).value
}

pub fn crd_est_detailed(values: &[f64], alpha: f64, rng: RngStream) -> Estimate {
    SplitSample::from_vec(values.to_vec(), rng, Some(alpha)).estimate(alpha)
}
