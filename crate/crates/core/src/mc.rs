//! Seeded replication studies over a (signal, change point) grid.
//!
//! Each grid cell runs `reps` independent replications, computes both
//! estimate sets per replication, and accumulates squared errors against
//! the true `τ` and the true `L(θ, τ) = θτ`. Replication `r` of cell
//! `(θ, τ)` draws from the stream keyed by a stable hash of
//! `(θ bits, τ, r)`, so cell results do not depend on grid composition,
//! worker count, or the total replication budget. Empirical risk ratios
//! `κ = MSE(τ̂_b)/MSE(τ̂_mle)` and `κ̃ = MSE(L̂_b)/MSE(L̂_mle)` are reported
//! per cell with batch-means standard errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::functional::{Functional, THETA_TAU_NAME, functional_by_name};
use crate::model::{ModelParams, generate_sequence};
use crate::rng::{RngStream, mix_stream};
use crate::sequence::estimate_all;

/// Full description of one replication study; two runs with equal configs
/// produce byte-identical tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n: usize,
    pub eps: f64,
    pub theta_values: Vec<f64>,
    pub tau_values: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub functional_name: String,
}

impl StudyConfig {
    /// The reference study: n = 20, ε = 1, θ ∈ {0.5, 1, 1.5, 2},
    /// τ ∈ {3..18}.
    pub fn figure1(seed: u64, reps: usize) -> Self {
        Self {
            n: 20,
            eps: 1.0,
            theta_values: vec![0.5, 1.0, 1.5, 2.0],
            tau_values: (3..=18).collect(),
            reps,
            seed,
            functional_name: THETA_TAU_NAME.to_owned(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {}", self.n)));
        }
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::NonPositiveNoise(self.eps));
        }
        if self.reps < 1 {
            return Err(Error::InvalidParams("reps must be at least 1".into()));
        }
        if self.theta_values.is_empty() || self.tau_values.is_empty() {
            return Err(Error::InvalidParams("theta and tau grids must be non-empty".into()));
        }
        if self.theta_values.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParams("theta values must be finite".into()));
        }
        if let Some(&tau) = self.tau_values.iter().find(|&&t| t < 1 || t > self.n) {
            return Err(Error::InvalidParams(format!(
                "tau = {tau} outside 1..={}",
                self.n
            )));
        }
        functional_by_name(&self.functional_name)?;
        Ok(())
    }
}

/// Empirical risks at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskCell {
    pub theta: f64,
    pub tau: usize,
    pub mse_tau_mle: f64,
    pub se_tau_mle: f64,
    pub mse_tau_bayes: f64,
    pub se_tau_bayes: f64,
    pub mse_l_mle: f64,
    pub se_l_mle: f64,
    pub mse_l_bayes: f64,
    pub se_l_bayes: f64,
    /// MSE(τ̂_b)/MSE(τ̂_mle).
    pub kappa: f64,
    /// MSE(L̂_b)/MSE(L̂_mle).
    pub kappa_tilde: f64,
}

/// All cells of a study, in (θ outer, τ inner) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTable {
    pub config: StudyConfig,
    pub cells: Vec<RiskCell>,
}

const BATCHES: usize = 100;

#[derive(Debug, Clone, Copy, Default)]
struct CellBatch {
    tau_mle: f64,
    tau_bayes: f64,
    l_mle: f64,
    l_bayes: f64,
    count: usize,
}

/// Runs one grid cell. The Bayes τ estimate enters as the raw posterior
/// mean (not rounded); the true functional value is the exact `θ·τ`.
pub fn run_cell<F: Functional + ?Sized>(
    theta: f64,
    tau: usize,
    eps: f64,
    n: usize,
    reps: usize,
    seed: u64,
    functional: &F,
) -> Result<RiskCell> {
    if reps < 1 {
        return Err(Error::InvalidParams("reps must be at least 1".into()));
    }
    let params = ModelParams::new(theta, tau, eps, n)?;
    let l_true = theta * tau as f64;
    let tau_true = tau as f64;

    let batches_n = BATCHES.min(reps);
    let results = exec::map_indexed(batches_n, |b| -> Result<CellBatch> {
        let (lo, hi) = exec::batch_bounds(reps, batches_n, b);
        let mut acc_tm = exec::CompensatedSum::new();
        let mut acc_tb = exec::CompensatedSum::new();
        let mut acc_lm = exec::CompensatedSum::new();
        let mut acc_lb = exec::CompensatedSum::new();
        for r in lo..hi {
            let stream_id = mix_stream(&[theta.to_bits(), tau as u64, r as u64]);
            let sample = generate_sequence(&params, RngStream::new(seed, stream_id));
            let est = estimate_all(&sample, functional)?;
            let d_tm = est.tau_mle as f64 - tau_true;
            let d_tb = est.tau_bayes - tau_true;
            let d_lm = est.l_mle - l_true;
            let d_lb = est.l_bayes - l_true;
            acc_tm.add(d_tm * d_tm);
            acc_tb.add(d_tb * d_tb);
            acc_lm.add(d_lm * d_lm);
            acc_lb.add(d_lb * d_lb);
        }
        Ok(CellBatch {
            tau_mle: acc_tm.value(),
            tau_bayes: acc_tb.value(),
            l_mle: acc_lm.value(),
            l_bayes: acc_lb.value(),
            count: hi - lo,
        })
    });
    let batches: Vec<CellBatch> = results.into_iter().collect::<Result<_>>()?;

    let counts: Vec<usize> = batches.iter().map(|b| b.count).collect();
    let col = |f: fn(&CellBatch) -> f64| -> Vec<f64> { batches.iter().map(f).collect() };
    let (mse_tau_mle, se_tau_mle) = exec::mean_and_batch_se(&col(|b| b.tau_mle), &counts);
    let (mse_tau_bayes, se_tau_bayes) = exec::mean_and_batch_se(&col(|b| b.tau_bayes), &counts);
    let (mse_l_mle, se_l_mle) = exec::mean_and_batch_se(&col(|b| b.l_mle), &counts);
    let (mse_l_bayes, se_l_bayes) = exec::mean_and_batch_se(&col(|b| b.l_bayes), &counts);

    Ok(RiskCell {
        theta,
        tau,
        mse_tau_mle,
        se_tau_mle,
        mse_tau_bayes,
        se_tau_bayes,
        mse_l_mle,
        se_l_mle,
        mse_l_bayes,
        se_l_bayes,
        kappa: mse_tau_bayes / mse_tau_mle,
        kappa_tilde: mse_l_bayes / mse_l_mle,
    })
}

/// Runs every cell of the study. Cell order is (θ outer, τ inner); the
/// content of each cell is independent of the others.
pub fn run_study(config: &StudyConfig) -> Result<RiskTable> {
    config.validate()?;
    let functional = functional_by_name(&config.functional_name)?;
    let grid: Vec<(f64, usize)> = config
        .theta_values
        .iter()
        .flat_map(|&theta| config.tau_values.iter().map(move |&tau| (theta, tau)))
        .collect();
    let cells = exec::map_indexed(grid.len(), |i| {
        let (theta, tau) = grid[i];
        run_cell(theta, tau, config.eps, config.n, config.reps, config.seed, functional)
    });
    let cells: Vec<RiskCell> = cells.into_iter().collect::<Result<_>>()?;
    Ok(RiskTable { config: config.clone(), cells })
}
