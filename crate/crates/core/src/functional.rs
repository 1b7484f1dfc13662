//! Smooth functionals `L(θ, τ)` of the signal and their Gaussian means.
//!
//! The Bayes estimator needs `E[L(Θ, τ)]` for `Θ ~ N(m, s²)` per candidate
//! change point. A functional can supply that expectation in closed form;
//! otherwise it is computed by 32-node Gauss–Hermite quadrature, which is
//! exact for polynomial `L` up to degree 63.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussHermite;

use crate::error::{Error, Result};

/// Number of Gauss–Hermite nodes used when no closed form is available.
pub const HERMITE_NODES: usize = 32;

/// A smooth functional of the signal parameters.
pub trait Functional: Sync {
    /// Point evaluation `L(θ, τ)`.
    fn eval(&self, theta: f64, tau: usize) -> f64;

    /// Exact `E[L(Θ, τ)]` for `Θ ~ N(mean, variance)`, if a closed form
    /// exists. The default has none.
    fn gaussian_mean_exact(&self, mean: f64, variance: f64, tau: usize) -> Option<f64> {
        let _ = (mean, variance, tau);
        None
    }
}

/// `E[L(Θ, τ)]` for `Θ ~ N(mean, variance)`: the exact form when the
/// functional provides one, Gauss–Hermite quadrature otherwise.
///
/// A non-finite expectation is reported as an error: it signals a
/// functional whose growth defeats the flat prior.
pub fn gaussian_mean<F: Functional + ?Sized>(
    functional: &F,
    mean: f64,
    variance: f64,
    tau: usize,
) -> Result<f64> {
    let value = match functional.gaussian_mean_exact(mean, variance, tau) {
        Some(v) => v,
        None => hermite_gaussian_mean(functional, mean, variance, tau),
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteQuadrature { mean, variance, tau })
    }
}

/// Gauss–Hermite evaluation of `E[L(Θ, τ)]`, `Θ ~ N(mean, variance)`:
/// `(1/√π) Σ w_i L(mean + √2·s·x_i, τ)`.
pub fn hermite_gaussian_mean<F: Functional + ?Sized>(
    functional: &F,
    mean: f64,
    variance: f64,
    tau: usize,
) -> f64 {
    let scale = std::f64::consts::SQRT_2 * variance.sqrt();
    hermite_rule().integrate(|x| functional.eval(mean + scale * x, tau)) / PI.sqrt()
}

fn hermite_rule() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(NonZeroUsize::new(HERMITE_NODES).unwrap()))
}

/// The built-in target functional `L(θ, τ) = θ·τ`, the total signal mass
/// before the change.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThetaTau;

impl Functional for ThetaTau {
    fn eval(&self, theta: f64, tau: usize) -> f64 {
        theta * tau as f64
    }

    fn gaussian_mean_exact(&self, mean: f64, _variance: f64, tau: usize) -> Option<f64> {
        Some(mean * tau as f64)
    }
}

/// Name under which [`ThetaTau`] is addressed in configs and on the CLI.
pub const THETA_TAU_NAME: &str = "theta-tau";

/// Resolves a functional by its configured name.
pub fn functional_by_name(name: &str) -> Result<&'static dyn Functional> {
    match name {
        THETA_TAU_NAME => Ok(&ThetaTau),
        other => Err(Error::UnknownFunctional(other.to_owned())),
    }
}
