//! Compensated summation and fixed-shape parallel reductions.

use rayon::prelude::*;

/// Rows per block in parallel reductions. Fixed so the reduction tree does not
/// depend on the thread count.
pub(crate) const BLOCK: usize = 2048;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Sum `f(i)` over `0..n` with blocks of [`BLOCK`] evaluated in parallel and
/// combined in index order. Bit-identical for any thread count.
pub(crate) fn par_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            compensated_sum((lo..hi).map(&f))
        })
        .collect();
    compensated_sum(partials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_ne!(xs.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn par_sum_matches_sequential_blocks() {
        let n = 3 * BLOCK + 17;
        let f = |i: usize| (i as f64).sqrt() * 1e-3;
        let a = par_sum(n, f);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| par_sum(n, f));
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - (0..n).map(f).sum::<f64>()).abs() < 1e-9);
    }
}
