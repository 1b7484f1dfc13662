//! Work scheduling and deterministic accumulation helpers.
//!
//! Work items are keyed by index and independent of each other; results are
//! collected in index order and reduced sequentially. Whether the items run
//! on a rayon pool (`parallel` feature) or in a plain loop, the combined
//! result is bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..count`, returning results in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Half-open index range of batch `b` out of `batches` covering `0..total`.
pub(crate) fn batch_bounds(total: usize, batches: usize, b: usize) -> (usize, usize) {
    (b * total / batches, (b + 1) * total / batches)
}

/// Neumaier-compensated summation; the result does not drift with the
/// number of terms the way a plain running sum does.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

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

/// Mean and batch-means standard error of per-batch totals.
///
/// `batch_sums[b]` is the sum of the statistic over batch `b`; `counts[b]`
/// the number of items in that batch. The SE treats batches as equally
/// weighted (sizes differ by at most one) and is NaN with fewer than two
/// batches.
pub(crate) fn mean_and_batch_se(batch_sums: &[f64], counts: &[usize]) -> (f64, f64) {
    let total: f64 = {
        let mut acc = CompensatedSum::new();
        for &s in batch_sums {
            acc.add(s);
        }
        acc.value()
    };
    let n: usize = counts.iter().sum();
    let mean = total / n as f64;
    (mean, batch_se(batch_sums, counts))
}

/// Standard error of the mean estimated from batch means.
pub(crate) fn batch_se(batch_sums: &[f64], counts: &[usize]) -> f64 {
    let b = batch_sums.len();
    if b < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = batch_sums
        .iter()
        .zip(counts)
        .map(|(&s, &c)| s / c as f64)
        .collect();
    se_of_mean(&means)
}

/// sd(values)/sqrt(len): the batch-means SE given per-batch estimates.
pub(crate) fn se_of_mean(values: &[f64]) -> f64 {
    let b = values.len();
    if b < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}
