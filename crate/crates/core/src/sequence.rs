//! MLE and generalized-Bayes estimators for the one-change sequence model.
//!
//! Both estimators are driven by the statistics
//! `U_k = (Σ_{i≤k} X_i)² / (2 ε² k)`: the MLE of τ is `argmax_k U_k` with
//! the conditional level estimate `X̄_τ̂`, and the flat-prior posterior puts
//! weight `p_k ∝ e^{U_k}/√k` on `τ = k` with `θ | τ=k ~ N(X̄_k, ε²/k)`.
//! Weights are always formed in the log domain: `U_k` grows like
//! `θ²τ/(2ε²)` and overflows `exp` long before the noise level gets
//! interestingly small.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{Functional, gaussian_mean};
use crate::model::SequenceSample;

/// Prefix sums `S_k` and the derived statistics `U_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeStats {
    prefix_sums: Vec<f64>,
    u: Vec<f64>,
    eps: f64,
}

impl CumulativeStats {
    pub fn from_observations(x: &[f64], eps: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::NonPositiveNoise(eps));
        }
        let inv_two_eps2 = 1.0 / (2.0 * eps * eps);
        let mut prefix_sums = Vec::with_capacity(x.len());
        let mut u = Vec::with_capacity(x.len());
        let mut s = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            s += xi;
            prefix_sums.push(s);
            u.push(s * s * inv_two_eps2 / (i + 1) as f64);
        }
        Ok(Self { prefix_sums, u, eps })
    }

    pub fn n(&self) -> usize {
        self.prefix_sums.len()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `S_k` for k = 1..n, stored at index k-1.
    pub fn prefix_sums(&self) -> &[f64] {
        &self.prefix_sums
    }

    /// `U_k` for k = 1..n, stored at index k-1.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Conditional mean `X̄_k = S_k / k` (1-based `k`).
    pub fn cond_mean(&self, k: usize) -> f64 {
        self.prefix_sums[k - 1] / k as f64
    }
}

/// The marginal posterior of τ and the conditional law of θ given τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    weights: Vec<f64>,
    cond_means: Vec<f64>,
    cond_vars: Vec<f64>,
}

impl PosteriorSummary {
    /// `p_k`, k = 1..n, at index k-1; sums to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `X̄_k`.
    pub fn cond_means(&self) -> &[f64] {
        &self.cond_means
    }

    /// `ε²/k`.
    pub fn cond_vars(&self) -> &[f64] {
        &self.cond_vars
    }
}

/// Point estimates of (τ, θ, L) under both procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub tau_mle: usize,
    pub theta_mle: f64,
    pub l_mle: f64,
    /// Posterior mean of τ; real-valued by convention, not rounded.
    pub tau_bayes: f64,
    pub theta_bayes: f64,
    pub l_bayes: f64,
}

/// `argmax_k U_k`, ties broken toward the smallest index (1-based).
pub fn mle_tau(stats: &CumulativeStats) -> usize {
    let u = stats.u();
    let mut best = 0;
    for (i, &ui) in u.iter().enumerate().skip(1) {
        if ui > u[best] {
            best = i;
        }
    }
    best + 1
}

/// MLE of `(τ, θ, L(θ, τ))`: `θ̂ = X̄_τ̂` and `L̂ = L(θ̂, τ̂)`.
pub fn mle_estimates<F: Functional + ?Sized>(
    sample: &SequenceSample,
    functional: &F,
) -> Result<(usize, f64, f64)> {
    let stats = CumulativeStats::from_observations(sample.x(), sample.params().eps())?;
    Ok(mle_from_stats(&stats, functional))
}

fn mle_from_stats<F: Functional + ?Sized>(
    stats: &CumulativeStats,
    functional: &F,
) -> (usize, f64, f64) {
    let tau = mle_tau(stats);
    let theta = stats.cond_mean(tau);
    (tau, theta, functional.eval(theta, tau))
}

/// Posterior weights and conditional moments, computed in the log domain:
/// `a_k = U_k − ln(k)/2`, `p = softmax(a)`.
pub fn bayes_posterior(stats: &CumulativeStats) -> PosteriorSummary {
    let n = stats.n();
    let u = stats.u();
    let mut log_weights = Vec::with_capacity(n);
    let mut max_a = f64::NEG_INFINITY;
    for (i, &ui) in u.iter().enumerate() {
        let a = ui - 0.5 * ((i + 1) as f64).ln();
        if a > max_a {
            max_a = a;
        }
        log_weights.push(a);
    }
    let mut weights = log_weights;
    let mut total = 0.0;
    for w in &mut weights {
        *w = (*w - max_a).exp();
        total += *w;
    }
    for w in &mut weights {
        *w /= total;
    }
    let eps2 = stats.eps() * stats.eps();
    let cond_means = (1..=n).map(|k| stats.cond_mean(k)).collect();
    let cond_vars = (1..=n).map(|k| eps2 / k as f64).collect();
    PosteriorSummary { weights, cond_means, cond_vars }
}

/// Generalized-Bayes estimates of `(τ, θ, L)` under quadratic loss:
/// `τ̂_b = Σ k p_k`, `θ̂_b = Σ p_k X̄_k`, and
/// `L̂_b = Σ_k p_k E[L(Θ, k)]` with `Θ ~ N(X̄_k, ε²/k)`.
pub fn bayes_estimates<F: Functional + ?Sized>(
    sample: &SequenceSample,
    functional: &F,
) -> Result<(f64, f64, f64)> {
    let stats = CumulativeStats::from_observations(sample.x(), sample.params().eps())?;
    let posterior = bayes_posterior(&stats);
    bayes_from_posterior(&posterior, functional)
}

fn bayes_from_posterior<F: Functional + ?Sized>(
    posterior: &PosteriorSummary,
    functional: &F,
) -> Result<(f64, f64, f64)> {
    let mut tau_b = 0.0;
    let mut theta_b = 0.0;
    let mut l_b = 0.0;
    for (i, &w) in posterior.weights().iter().enumerate() {
        let k = i + 1;
        let mean = posterior.cond_means()[i];
        tau_b += k as f64 * w;
        theta_b += w * mean;
        l_b += w * gaussian_mean(functional, mean, posterior.cond_vars()[i], k)?;
    }
    Ok((tau_b, theta_b, l_b))
}

/// Both estimate sets from one pass over the sample.
pub fn estimate_all<F: Functional + ?Sized>(
    sample: &SequenceSample,
    functional: &F,
) -> Result<EstimateSet> {
    let stats = CumulativeStats::from_observations(sample.x(), sample.params().eps())?;
    let (tau_mle, theta_mle, l_mle) = mle_from_stats(&stats, functional);
    let posterior = bayes_posterior(&stats);
    let (tau_bayes, theta_bayes, l_bayes) = bayes_from_posterior(&posterior, functional)?;
    Ok(EstimateSet { tau_mle, theta_mle, l_mle, tau_bayes, theta_bayes, l_bayes })
}

/// Exact log-likelihood of the observations at `(θ, τ)`, including the
/// `−(n/2)·ln(2πε²)` constant.
pub fn log_likelihood(x: &[f64], theta: f64, tau: usize, eps: f64) -> f64 {
    let n = x.len();
    assert!(n >= 1, "log_likelihood needs at least one observation");
    assert!((1..=n).contains(&tau), "tau must lie in 1..={n}, got {tau}");
    assert!(eps > 0.0, "eps must be positive, got {eps}");
    let mut quad = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let d = if i < tau { xi - theta } else { xi };
        quad += d * d;
    }
    let eps2 = eps * eps;
    -0.5 * n as f64 * (2.0 * std::f64::consts::PI * eps2).ln() - quad / (2.0 * eps2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::ThetaTau;
    use crate::model::{ModelParams, generate_sequence};
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    fn sample_from(x: &[f64], eps: f64) -> SequenceSample {
        let params = ModelParams::new(0.0, 1, eps, x.len()).unwrap();
        SequenceSample::from_observations(x.to_vec(), params).unwrap()
    }

    const WORKED: [f64; 4] = [2.0, -1.0, 1.5, 0.1];

    #[test]
    fn cumulative_stats_match_hand_computation() {
        let stats = CumulativeStats::from_observations(&WORKED, 1.0).unwrap();
        assert_eq!(stats.prefix_sums(), &[2.0, 1.0, 2.5, 2.6]);
        // direct evaluation of U_k = S_k^2 / (2 k)
        let expected = [
            2.0 * 2.0 / 2.0,
            1.0 / 4.0,
            2.5 * 2.5 / 6.0,
            2.6 * 2.6 / 8.0,
        ];
        for (got, want) in stats.u().iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn zero_observations_give_zero_statistics() {
        let stats = CumulativeStats::from_observations(&[0.0; 6], 2.0).unwrap();
        assert!(stats.u().iter().all(|&u| u == 0.0));
    }

    #[test]
    fn u_is_invariant_under_joint_power_of_two_scaling() {
        let stats = CumulativeStats::from_observations(&WORKED, 1.0).unwrap();
        let scaled: Vec<f64> = WORKED.iter().map(|&v| 4.0 * v).collect();
        let stats4 = CumulativeStats::from_observations(&scaled, 4.0).unwrap();
        assert_eq!(stats.u(), stats4.u());
    }

    #[test]
    fn stats_reject_bad_input() {
        assert!(matches!(
            CumulativeStats::from_observations(&[], 1.0),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            CumulativeStats::from_observations(&[1.0], 0.0),
            Err(Error::NonPositiveNoise(_))
        ));
    }

    #[test]
    fn mle_tau_picks_the_change_point_without_noise() {
        // theta = 1, tau = 3, n = 5, U evaluated with eps = 1 on the clean
        // signal: U_k = k/2 up to the change, 4.5/k after it
        let stats = CumulativeStats::from_observations(&[1.0, 1.0, 1.0, 0.0, 0.0], 1.0).unwrap();
        for (i, &u) in stats.u().iter().enumerate() {
            let k = (i + 1) as f64;
            let want = if i < 3 { k / 2.0 } else { 4.5 / k };
            assert_relative_eq!(u, want, max_relative = 1e-14);
        }
        assert_eq!(mle_tau(&stats), 3);
    }

    #[test]
    fn mle_tau_on_worked_example() {
        let stats = CumulativeStats::from_observations(&WORKED, 1.0).unwrap();
        assert_eq!(mle_tau(&stats), 1);
    }

    #[test]
    fn mle_tau_ignores_sign() {
        let flipped: Vec<f64> = WORKED.iter().map(|&v| -v).collect();
        let a = CumulativeStats::from_observations(&WORKED, 1.0).unwrap();
        let b = CumulativeStats::from_observations(&flipped, 1.0).unwrap();
        assert_eq!(mle_tau(&a), mle_tau(&b));
        assert_eq!(a.u(), b.u());
    }

    #[test]
    fn mle_tau_breaks_ties_toward_smallest_index() {
        // dyadic observations make U_1 = U_4 = 1/2 exactly
        let stats = CumulativeStats::from_observations(&[1.0, 0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(stats.u()[0], stats.u()[3]);
        assert_eq!(mle_tau(&stats), 1);
        // degenerate all-zero input ties every index
        let zeros = CumulativeStats::from_observations(&[0.0; 5], 1.0).unwrap();
        assert_eq!(mle_tau(&zeros), 1);
    }

    #[test]
    fn mle_estimates_noiseless() {
        let x = [2.0, 2.0, 2.0, 2.0, 0.0, 0.0];
        let (tau, theta, l) = mle_estimates(&sample_from(&x, 1.0), &ThetaTau).unwrap();
        assert_eq!(tau, 4);
        assert_eq!(theta, 2.0);
        assert_eq!(l, 8.0);
    }

    #[test]
    fn mle_estimates_on_worked_example() {
        let (tau, theta, l) = mle_estimates(&sample_from(&WORKED, 1.0), &ThetaTau).unwrap();
        assert_eq!(tau, 1);
        assert_eq!(theta, 2.0);
        assert_eq!(l, 2.0);
    }

    #[test]
    fn posterior_weights_for_two_zero_observations() {
        // U = (0,0); a = (0, -ln2/2); p_1 = 1/(1 + 2^{-1/2})
        let stats = CumulativeStats::from_observations(&[0.0, 0.0], 1.0).unwrap();
        let posterior = bayes_posterior(&stats);
        let p1 = 1.0 / (1.0 + 0.5f64.sqrt());
        assert_relative_eq!(posterior.weights()[0], p1, max_relative = 1e-15);
        assert_relative_eq!(posterior.weights()[1], 1.0 - p1, max_relative = 1e-14);
        assert_relative_eq!(posterior.weights()[0], 0.5857864376269049, max_relative = 1e-14);
    }

    #[test]
    fn posterior_weights_survive_huge_u() {
        // U up to 1e4 in magnitude must still normalize
        let x = vec![100.0; 8]; // U_k = 5000 k
        let stats = CumulativeStats::from_observations(&x, 1.0).unwrap();
        let posterior = bayes_posterior(&stats);
        let total: f64 = posterior.weights().iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        assert!(posterior.weights().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn bayes_estimates_for_two_zero_observations() {
        let sample = sample_from(&[0.0, 0.0], 1.0);
        let (tau_b, theta_b, l_b) = bayes_estimates(&sample, &ThetaTau).unwrap();
        let p1 = 1.0 / (1.0 + 0.5f64.sqrt());
        assert_relative_eq!(tau_b, p1 + 2.0 * (1.0 - p1), max_relative = 1e-14);
        // the worked value 1/(1+2^{-1/2}) + 2·2^{-1/2}/(1+2^{-1/2}) is sqrt(2)
        assert_relative_eq!(tau_b, std::f64::consts::SQRT_2, max_relative = 1e-13);
        assert_eq!(theta_b, 0.0);
        assert_eq!(l_b, 0.0);
    }

    #[test]
    fn bayes_concentrates_on_clean_signal_at_small_noise() {
        // p_tau dominates once U_tau leads by ~ margin/(2 eps^2)
        let x = [1.0, 1.0, 1.0, 0.0, 0.0];
        let sample = sample_from(&x, 0.01);
        let (tau_b, _, l_b) = bayes_estimates(&sample, &ThetaTau).unwrap();
        assert!((tau_b - 3.0).abs() < 0.01, "tau_b = {tau_b}");
        assert!((l_b - 3.0).abs() < 0.05, "l_b = {l_b}");
    }

    #[test]
    fn estimate_all_is_consistent_with_parts() {
        let params = ModelParams::new(1.0, 6, 0.8, 12).unwrap();
        let sample = generate_sequence(&params, RngStream::new(3, 17));
        let est = estimate_all(&sample, &ThetaTau).unwrap();
        let (tm, thm, lm) = mle_estimates(&sample, &ThetaTau).unwrap();
        let (tb, thb, lb) = bayes_estimates(&sample, &ThetaTau).unwrap();
        assert_eq!((est.tau_mle, est.theta_mle, est.l_mle), (tm, thm, lm));
        assert_eq!((est.tau_bayes, est.theta_bayes, est.l_bayes), (tb, thb, lb));
        assert!(est.tau_bayes >= 1.0 && est.tau_bayes <= 12.0);
        // theta_mle is the conditional mean at tau_mle
        let stats = CumulativeStats::from_observations(sample.x(), 0.8).unwrap();
        assert_eq!(est.theta_mle, stats.cond_mean(est.tau_mle));
    }

    #[test]
    fn log_likelihood_of_single_standard_normal_point() {
        let ll = log_likelihood(&[0.0], 0.0, 1, 1.0);
        assert_relative_eq!(ll, -0.9189385332046727, max_relative = 1e-15);
    }

    #[test]
    fn log_likelihood_shift_identity() {
        // ll(x, theta, tau) - ll(x, 0, tau) = (theta/eps^2) S_tau - theta^2 tau/(2 eps^2)
        let x = [0.4, -1.0, 2.2, 0.3, -0.6];
        let (theta, eps) = (0.9, 0.7);
        let stats = CumulativeStats::from_observations(&x, eps).unwrap();
        for tau in 1..=x.len() {
            let lhs = log_likelihood(&x, theta, tau, eps) - log_likelihood(&x, 0.0, tau, eps);
            let s = stats.prefix_sums()[tau - 1];
            let rhs = theta / (eps * eps) * s - theta * theta * tau as f64 / (2.0 * eps * eps);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-11, epsilon = 1e-12);
        }
    }

    #[test]
    fn grid_search_agrees_with_closed_form_mle() {
        // brute-force argmax over theta in [-5, 5] step 1e-4 and all tau
        let params = ModelParams::new(1.2, 4, 0.9, 6).unwrap();
        for rep in 0..3u64 {
            let sample = generate_sequence(&params, RngStream::new(100, rep));
            let mut best = (f64::NEG_INFINITY, 0usize, 0.0f64);
            for tau in 1..=6 {
                for step in 0..=100_000u64 {
                    let theta = -5.0 + step as f64 * 1e-4;
                    let ll = log_likelihood(sample.x(), theta, tau, 0.9);
                    if ll > best.0 {
                        best = (ll, tau, theta);
                    }
                }
            }
            let (tau_hat, theta_hat, _) = mle_estimates(&sample, &ThetaTau).unwrap();
            assert_eq!(best.1, tau_hat, "rep {rep}");
            assert!(
                (best.2 - theta_hat).abs() <= 5.1e-5,
                "rep {rep}: grid {} vs closed form {theta_hat}",
                best.2
            );
        }
    }
}
