//! The observation model: a Gaussian sequence whose mean drops to zero
//! after an unknown change point.
//!
//! `X_i = θ·1(i ≤ τ) + ε ξ_i`, `i = 1..n`, with i.i.d. standard-normal
//! `ξ_i`, known noise level `ε`, and unknown `(θ, τ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Ground-truth parameters of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    theta: f64,
    tau: usize,
    eps: f64,
    n: usize,
}

impl ModelParams {
    /// Validates `1 ≤ tau ≤ n`, `n ≥ 2`, finite `theta`, and `eps ≥ 0`.
    ///
    /// `eps = 0` is accepted so noiseless sequences can be generated;
    /// estimation entry points require a strictly positive noise level.
    pub fn new(theta: f64, tau: usize, eps: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {n}")));
        }
        if tau < 1 || tau > n {
            return Err(Error::InvalidParams(format!(
                "tau must lie in 1..={n}, got {tau}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParams(format!("theta must be finite, got {theta}")));
        }
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidParams(format!(
                "eps must be finite and non-negative, got {eps}"
            )));
        }
        Ok(Self { theta, tau, eps, n })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Signal-to-noise ratio θ/ε; derived, never stored.
    pub fn snr(&self) -> f64 {
        self.theta / self.eps
    }

    /// Mean of `X_i` (1-based index).
    pub fn signal(&self, i: usize) -> f64 {
        if i <= self.tau { self.theta } else { 0.0 }
    }
}

/// One observed sequence together with the parameters and stream that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSample {
    x: Vec<f64>,
    params: ModelParams,
    seed: u64,
    replication_index: u64,
}

impl SequenceSample {
    /// Wraps externally supplied observations (e.g. read from a file).
    /// The provenance fields are zeroed.
    pub fn from_observations(x: Vec<f64>, params: ModelParams) -> Result<Self> {
        if x.len() != params.n() {
            return Err(Error::InvalidParams(format!(
                "observation length {} does not match n = {}",
                x.len(),
                params.n()
            )));
        }
        Ok(Self { x, params, seed: 0, replication_index: 0 })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replication_index(&self) -> u64 {
        self.replication_index
    }

    /// Re-draws the sample from its recorded provenance; bit-identical to
    /// the original.
    pub fn regenerate(&self) -> SequenceSample {
        generate_sequence(
            &self.params,
            RngStream::new(self.seed, self.replication_index),
        )
    }
}

/// Draws one sequence from the model. The sample records the stream key,
/// so `(seed, replication_index)` reproduces it exactly.
pub fn generate_sequence(params: &ModelParams, stream: RngStream) -> SequenceSample {
    let mut src = stream.normals();
    let x = (1..=params.n())
        .map(|i| params.signal(i) + params.eps() * src.next_normal())
        .collect();
    SequenceSample {
        x,
        params: *params,
        seed: stream.seed(),
        replication_index: stream.stream_id(),
    }
}
