//! The limiting likelihood-ratio objects and their Monte Carlo constants.
//!
//! As the noise level vanishes, the local log-likelihood of the change
//! point converges to `g(u) = B(u) − |u|/2` with `B` a two-sided Brownian
//! motion, up to the exact time rescaling `u ↦ u/Δ²` by the jump size.
//! This module discretizes `g` on a symmetric grid, extracts
//!
//! * `û_mle` — the argmax of `g`, and
//! * `û_b`  — the posterior mean `Σ u·e^{g(u)} / Σ e^{g(u)}`,
//!
//! and estimates `E û_mle²`, `E û_b²`, and their ratio over many paths.
//! The targets are the classical values `26`, `16ζ(3)`, and `8ζ(3)/13`.
//! Everything is simulated at Δ = 1 and rescaled by `1/Δ²`, which is an
//! identity of the limiting process, not an approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::rng::{NormalSource, RngStream};

/// Symmetric grid on `[-T, T]` with step `h`; contains 0, `2(T/h)+1`
/// points in total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec", into = "RawGridSpec")]
pub struct GridSpec {
    step: f64,
    truncation: f64,
    half_points: usize,
}

/// Wire form of [`GridSpec`]; conversion re-runs validation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawGridSpec {
    step: f64,
    truncation: f64,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGridSpec) -> Result<Self> {
        GridSpec::new(raw.step, raw.truncation)
    }
}

impl From<GridSpec> for RawGridSpec {
    fn from(grid: GridSpec) -> Self {
        Self { step: grid.step, truncation: grid.truncation }
    }
}

impl GridSpec {
    /// `step` = h, `truncation` = T. T/h must be a whole number (to one
    /// part in 1e9) and the grid must have at least 3 points.
    pub fn new(step: f64, truncation: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 || !truncation.is_finite() || truncation <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "grid step and truncation must be positive and finite, got h = {step}, T = {truncation}"
            )));
        }
        let ratio = truncation / step;
        let rounded = ratio.round();
        if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::MisalignedGrid { step, truncation });
        }
        let half_points = rounded as usize;
        let spec = Self { step, truncation, half_points };
        if spec.points() < 3 {
            return Err(Error::DegenerateGrid { points: spec.points() });
        }
        Ok(spec)
    }

    /// Default production grid: h = 0.01 on [-200, 200].
    pub fn default_grid() -> Self {
        Self::new(0.01, 200.0).expect("default grid is valid")
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Total number of grid points (odd).
    pub fn points(&self) -> usize {
        2 * self.half_points + 1
    }

    /// Index of u = 0.
    pub fn center(&self) -> usize {
        self.half_points
    }

    /// Grid position of index `i`: `(i - center)·h`.
    pub fn position(&self, i: usize) -> f64 {
        (i as i64 - self.half_points as i64) as f64 * self.step
    }
}

/// One discretized two-sided Brownian motion.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    grid: GridSpec,
    values: Vec<f64>,
}

impl BrownianPath {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `B` at the grid points, index 0 at u = -T.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Draws a path: cumulative sums of independent `N(0, h)` increments
/// outward from 0, positive branch first, then the negative branch from
/// fresh draws of the same stream.
pub fn sample_brownian_path(grid: &GridSpec, stream: RngStream) -> BrownianPath {
    let mut src = stream.normals();
    let mut values = vec![0.0; grid.points()];
    fill_path(grid, &mut src, &mut values);
    BrownianPath { grid: *grid, values }
}

fn fill_path(grid: &GridSpec, src: &mut NormalSource, values: &mut [f64]) {
    let m = grid.center();
    let sd = grid.step().sqrt();
    values[m] = 0.0;
    let mut b = 0.0;
    for v in &mut values[m + 1..] {
        b += sd * src.next_normal();
        *v = b;
    }
    let mut b = 0.0;
    for v in values[..m].iter_mut().rev() {
        b += sd * src.next_normal();
        *v = b;
    }
}

/// The two limiting estimates extracted from one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitDrawResult {
    /// Argmax of the limiting likelihood, rescaled by `1/Δ²`.
    pub u_mle: f64,
    /// Posterior mean under the limiting likelihood, rescaled by `1/Δ²`.
    pub u_bayes: f64,
    pub delta: f64,
}

/// Raw (Δ = 1) estimates on a drift-adjusted path.
#[derive(Debug, Clone, Copy)]
struct RawEstimates {
    u_mle: f64,
    u_bayes: f64,
}

/// Contributions more than this far below the running maximum of `g`
/// cannot move the 64-bit sums and are skipped.
const LOG_WEIGHT_FLOOR: f64 = -60.0;

fn raw_estimates(grid: &GridSpec, values: &[f64]) -> RawEstimates {
    // pass 1: maximum of g(u) = B(u) - |u|/2; ties go to the smallest
    // |u|, then to the negative sign
    let mut g_best = f64::NEG_INFINITY;
    let mut u_best = 0.0f64;
    for (i, &b) in values.iter().enumerate() {
        let u = grid.position(i);
        let g = b - 0.5 * u.abs();
        if g > g_best
            || (g == g_best && (u.abs() < u_best.abs() || (u.abs() == u_best.abs() && u < u_best)))
        {
            g_best = g;
            u_best = u;
        }
    }
    // pass 2: posterior mean as the ratio of the grid sums of u e^{g-g*}
    // and e^{g-g*}; the grid step cancels
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &b) in values.iter().enumerate() {
        let u = grid.position(i);
        let g = b - 0.5 * u.abs() - g_best;
        if g >= LOG_WEIGHT_FLOOR {
            let w = g.exp();
            num += u * w;
            den += w;
        }
    }
    RawEstimates { u_mle: u_best, u_bayes: num / den }
}

/// Estimates on a given path at jump size `delta`, via the exact
/// `1/Δ²` rescaling of the Δ = 1 estimates.
pub fn limit_estimates_on_path(path: &BrownianPath, delta: f64) -> Result<LimitDrawResult> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParams(format!("delta must be positive, got {delta}")));
    }
    if path.values().len() < 3 {
        return Err(Error::DegenerateGrid { points: path.values().len() });
    }
    let raw = raw_estimates(&path.grid, &path.values);
    // dividing (rather than multiplying by a precomputed reciprocal)
    // keeps the scaling identity est(Δ) = est(1)/Δ² bit-exact
    let d2 = delta * delta;
    Ok(LimitDrawResult { u_mle: raw.u_mle / d2, u_bayes: raw.u_bayes / d2, delta })
}

/// Draws one path and extracts both estimates.
pub fn draw_limit_estimates(
    delta: f64,
    grid: &GridSpec,
    stream: RngStream,
) -> Result<LimitDrawResult> {
    let path = sample_brownian_path(grid, stream);
    limit_estimates_on_path(&path, delta)
}

/// The Gaussian block of the limiting log-likelihood: scores `Z_i` and the
/// exact maximizers `ĥ_i = Z_i/I_i` (the posterior means coincide).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitGaussPart {
    pub i1: f64,
    pub i2: f64,
    pub z1: f64,
    pub z2: f64,
    pub h1_hat: f64,
    pub h2_hat: f64,
}

/// Draws the Gaussian block for Fisher-type norms `i1`, `i2`.
pub fn draw_limit_gauss_part(i1: f64, i2: f64, stream: RngStream) -> Result<LimitGaussPart> {
    if !i1.is_finite() || i1 <= 0.0 || !i2.is_finite() || i2 <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "Fisher norms must be positive and finite, got i1 = {i1}, i2 = {i2}"
        )));
    }
    let mut src = stream.normals();
    let z1 = src.next_normal();
    let z2 = src.next_normal();
    Ok(LimitGaussPart { i1, i2, z1, z2, h1_hat: z1 / i1, h2_hat: z2 / i2 })
}

/// Monte Carlo estimates of the limiting second moments and their ratio,
/// with batch-means standard errors (100 batches).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub delta: f64,
    pub reps: usize,
    /// `E û_mle²` (target 26/Δ⁴).
    pub e_umle2: f64,
    pub e_umle2_se: f64,
    /// `E û_b²` (target 16ζ(3)/Δ⁴).
    pub e_ub2: f64,
    pub e_ub2_se: f64,
    /// Paired ratio `mean(û_b²)/mean(û_mle²)` (target 8ζ(3)/13).
    pub kappa0_hat: f64,
    pub kappa0_se: f64,
    /// `E û_mle` and `E û_b`, both 0 by symmetry.
    pub mean_umle: f64,
    pub mean_umle_se: f64,
    pub mean_ub: f64,
    pub mean_ub_se: f64,
    /// Fraction of draws whose argmax lay beyond T/2 at Δ = 1; a
    /// truncation-adequacy diagnostic.
    pub tail_exceed_fraction: f64,
}

const BATCHES: usize = 100;

#[derive(Debug, Clone, Copy, Default)]
struct BatchSums {
    umle2: f64,
    ub2: f64,
    umle: f64,
    ub: f64,
    exceeded: usize,
    count: usize,
}

/// Paired Monte Carlo estimation of the limiting constants over `reps`
/// shared paths. Replication `r` draws from stream `(seed, r)`, so the
/// result does not depend on the worker count.
pub fn estimate_limit_constants(
    delta: f64,
    grid: &GridSpec,
    reps: usize,
    seed: u64,
) -> Result<LimitConstants> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParams(format!("delta must be positive, got {delta}")));
    }
    if reps < 100 {
        return Err(Error::InvalidParams(format!("need at least 100 reps, got {reps}")));
    }
    let grid = *grid;
    let half_range = grid.truncation() / 2.0;

    let batches = exec::map_indexed(BATCHES, |b| {
        let (lo, hi) = exec::batch_bounds(reps, BATCHES, b);
        let mut values = vec![0.0; grid.points()];
        let mut umle2 = exec::CompensatedSum::new();
        let mut ub2 = exec::CompensatedSum::new();
        let mut umle = exec::CompensatedSum::new();
        let mut ub = exec::CompensatedSum::new();
        let mut exceeded = 0usize;
        for r in lo..hi {
            let mut src = RngStream::new(seed, r as u64).normals();
            fill_path(&grid, &mut src, &mut values);
            let raw = raw_estimates(&grid, &values);
            umle2.add(raw.u_mle * raw.u_mle);
            ub2.add(raw.u_bayes * raw.u_bayes);
            umle.add(raw.u_mle);
            ub.add(raw.u_bayes);
            if raw.u_mle.abs() > half_range {
                exceeded += 1;
            }
        }
        BatchSums {
            umle2: umle2.value(),
            ub2: ub2.value(),
            umle: umle.value(),
            ub: ub.value(),
            exceeded,
            count: hi - lo,
        }
    });

    let counts: Vec<usize> = batches.iter().map(|b| b.count).collect();
    let col = |f: fn(&BatchSums) -> f64| -> Vec<f64> { batches.iter().map(f).collect() };

    let (m_umle2, se_umle2) = exec::mean_and_batch_se(&col(|b| b.umle2), &counts);
    let (m_ub2, se_ub2) = exec::mean_and_batch_se(&col(|b| b.ub2), &counts);
    let (m_umle, se_umle) = exec::mean_and_batch_se(&col(|b| b.umle), &counts);
    let (m_ub, se_ub) = exec::mean_and_batch_se(&col(|b| b.ub), &counts);

    // ratio of the paired means; SE by the delta method over batch means,
    // which stays finite even when a single batch happens to contain an
    // argmax exactly at zero
    let kappa0_hat = m_ub2 / m_umle2;
    let linearized: Vec<f64> = batches
        .iter()
        .map(|b| {
            let count = b.count as f64;
            b.ub2 / count - kappa0_hat * (b.umle2 / count)
        })
        .collect();
    let kappa0_se = exec::se_of_mean(&linearized) / m_umle2;

    let exceeded: usize = batches.iter().map(|b| b.exceeded).sum();

    // the draws were made at delta = 1; rescale moments exactly
    let d2 = delta * delta;
    let d4 = d2 * d2;
    Ok(LimitConstants {
        delta,
        reps,
        e_umle2: m_umle2 / d4,
        e_umle2_se: se_umle2 / d4,
        e_ub2: m_ub2 / d4,
        e_ub2_se: se_ub2 / d4,
        kappa0_hat,
        kappa0_se,
        mean_umle: m_umle / d2,
        mean_umle_se: se_umle / d2,
        mean_ub: m_ub / d2,
        mean_ub_se: se_ub / d2,
        tail_exceed_fraction: exceeded as f64 / reps as f64,
    })
}
