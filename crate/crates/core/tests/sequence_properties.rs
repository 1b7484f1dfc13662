//! Property suites for the sequence-model estimators.

use approx::assert_relative_eq;
use proptest::prelude::*;

use taustep_core::functional::{Functional, ThetaTau};
use taustep_core::model::{ModelParams, SequenceSample, generate_sequence};
use taustep_core::rng::RngStream;
use taustep_core::sequence::{
    CumulativeStats, bayes_estimates, bayes_posterior, estimate_all, log_likelihood, mle_tau,
};

/// `θ·τ` with the closed form hidden, forcing Gauss–Hermite quadrature.
struct ThetaTauNumeric;

impl Functional for ThetaTauNumeric {
    fn eval(&self, theta: f64, tau: usize) -> f64 {
        ThetaTau.eval(theta, tau)
    }
}

fn sample_from(x: &[f64], eps: f64) -> SequenceSample {
    let params = ModelParams::new(0.0, 1, eps, x.len()).unwrap();
    SequenceSample::from_observations(x.to_vec(), params).unwrap()
}

/// Observation vectors on a dyadic lattice: sums and sign flips are exact.
fn dyadic_observations() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-8192i32..=8192).prop_map(|i| i as f64 / 1024.0), 2..=64)
}

fn observations() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-25.0f64..25.0, 2..=64)
}

proptest! {
    #[test]
    fn prefix_sums_difference_identity(x in dyadic_observations()) {
        // on the dyadic lattice the sums are exact, so consecutive
        // differences recover the observations bit-for-bit
        let stats = CumulativeStats::from_observations(&x, 1.0).unwrap();
        let s = stats.prefix_sums();
        prop_assert_eq!(s[0], x[0]);
        for k in 1..x.len() {
            prop_assert_eq!(s[k] - s[k - 1], x[k]);
        }
    }

    #[test]
    fn sign_flip_invariance(x in dyadic_observations(), eps in 0.05f64..4.0) {
        let flipped: Vec<f64> = x.iter().map(|&v| -v).collect();
        let a = estimate_all(&sample_from(&x, eps), &ThetaTau).unwrap();
        let b = estimate_all(&sample_from(&flipped, eps), &ThetaTau).unwrap();
        prop_assert_eq!(a.tau_mle, b.tau_mle);
        prop_assert_eq!(a.tau_bayes, b.tau_bayes);
        prop_assert_eq!(a.theta_mle, -b.theta_mle);
        prop_assert_eq!(a.theta_bayes, -b.theta_bayes);
        prop_assert_eq!(a.l_mle, -b.l_mle);
        prop_assert_eq!(a.l_bayes, -b.l_bayes);
        let pa = bayes_posterior(&CumulativeStats::from_observations(&x, eps).unwrap());
        let pb = bayes_posterior(&CumulativeStats::from_observations(&flipped, eps).unwrap());
        prop_assert_eq!(pa.weights(), pb.weights());
    }

    #[test]
    fn joint_scale_invariance(x in observations(), eps in 0.05f64..4.0, c in 0.01f64..100.0) {
        let scaled: Vec<f64> = x.iter().map(|&v| c * v).collect();
        let a = estimate_all(&sample_from(&x, eps), &ThetaTau).unwrap();
        let b = estimate_all(&sample_from(&scaled, c * eps), &ThetaTau).unwrap();
        prop_assert_eq!(a.tau_mle, b.tau_mle);
        prop_assert!((a.tau_bayes - b.tau_bayes).abs() <= 1e-12 * a.tau_bayes.abs().max(1.0));
        let rel = |u: f64, v: f64| (u - v).abs() / v.abs().max(1e-300);
        if a.theta_mle != 0.0 {
            prop_assert!(rel(b.theta_mle, c * a.theta_mle) <= 1e-12);
        }
        if a.l_bayes != 0.0 {
            prop_assert!(rel(b.l_bayes, c * a.l_bayes) <= 1e-11);
        }
        let pa = bayes_posterior(&CumulativeStats::from_observations(&x, eps).unwrap());
        let pb = bayes_posterior(&CumulativeStats::from_observations(&scaled, c * eps).unwrap());
        for (wa, wb) in pa.weights().iter().zip(pb.weights()) {
            prop_assert!((wa - wb).abs() <= 1e-12);
        }
    }

    #[test]
    fn posterior_weights_normalize(x in observations(), eps in 0.05f64..4.0) {
        let stats = CumulativeStats::from_observations(&x, eps).unwrap();
        let posterior = bayes_posterior(&stats);
        let total: f64 = posterior.weights().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(posterior.weights().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn softmax_shift_invariance(x in observations(), eps in 0.05f64..4.0, c in -10.0f64..10.0) {
        // adding c to every log weight is the same as scaling eps-free
        // statistics; weights must not move beyond rounding noise
        let stats = CumulativeStats::from_observations(&x, eps).unwrap();
        let base = bayes_posterior(&stats);
        let shifted_logs: Vec<f64> = stats
            .u()
            .iter()
            .enumerate()
            .map(|(i, &u)| u - 0.5 * ((i + 1) as f64).ln() + c)
            .collect();
        let m = shifted_logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = shifted_logs.iter().map(|&a| (a - m).exp()).collect();
        let total: f64 = exps.iter().sum();
        for (w, e) in base.weights().iter().zip(&exps) {
            prop_assert!((w - e / total).abs() <= 1e-13);
        }
    }

    #[test]
    fn mle_functional_reduces_to_prefix_sum(x in observations(), eps in 0.05f64..4.0) {
        // algebraic identity (S/τ)·τ = S, up to one rounding each way
        let sample = sample_from(&x, eps);
        let est = estimate_all(&sample, &ThetaTau).unwrap();
        let stats = CumulativeStats::from_observations(&x, eps).unwrap();
        let s = stats.prefix_sums()[est.tau_mle - 1];
        prop_assert!((est.l_mle - s).abs() <= 2.0 * f64::EPSILON * s.abs());
    }

    #[test]
    fn closed_form_and_quadrature_bayes_agree(x in observations(), eps in 0.05f64..4.0) {
        let sample = sample_from(&x, eps);
        let (_, _, l_exact) = bayes_estimates(&sample, &ThetaTau).unwrap();
        let (_, _, l_quad) = bayes_estimates(&sample, &ThetaTauNumeric).unwrap();
        // the closed form equals Σ p_k S_k; quadrature must match to 1e-10
        let stats = CumulativeStats::from_observations(&x, eps).unwrap();
        let posterior = bayes_posterior(&stats);
        let reduction: f64 = posterior
            .weights()
            .iter()
            .zip(stats.prefix_sums())
            .map(|(w, s)| w * s)
            .sum();
        prop_assert!((l_exact - reduction).abs() <= 1e-10 * reduction.abs().max(1.0));
        prop_assert!((l_quad - l_exact).abs() <= 1e-10 * l_exact.abs().max(1.0));
    }
}

#[test]
fn shift_invariance_on_the_two_point_example() {
    // frozen case from the worked posterior example: dyadic shifts leave
    // the weights unchanged to 1e-15
    let stats = CumulativeStats::from_observations(&[0.0, 0.0], 1.0).unwrap();
    let base = bayes_posterior(&stats);
    for c in [-4.0, -0.5, 0.25, 1.0, 4.0] {
        let logs = [c, -0.5 * 2.0f64.ln() + c];
        let m = logs[0].max(logs[1]);
        let exps = [(logs[0] - m).exp(), (logs[1] - m).exp()];
        let total = exps[0] + exps[1];
        for (w, e) in base.weights().iter().zip(exps) {
            assert!((w - e / total).abs() <= 1e-15);
        }
    }
}

#[test]
fn mle_is_consistent_at_small_noise() {
    // eps = theta/20: a thousand replications, zero missed change points
    let theta = 1.0;
    let params = ModelParams::new(theta, 10, theta / 20.0, 20).unwrap();
    let mut misses = 0;
    for r in 0..1000u64 {
        let sample = generate_sequence(&params, RngStream::new(2024, r));
        let stats = CumulativeStats::from_observations(sample.x(), params.eps()).unwrap();
        if mle_tau(&stats) != 10 {
            misses += 1;
        }
    }
    assert_eq!(misses, 0);
}

#[test]
fn log_likelihood_ratio_matches_the_gaussian_shift_law() {
    // at eps = 1e-3 the log-LR between (theta + eps h, tau) and
    // (theta, tau) is exactly h Σ ξ_i - h²τ/2 in distribution:
    // mean -h²τ/2 and variance h²τ, checked to 5 SE over 1e4 reps
    let (theta, tau, n, h, eps) = (1.0, 7usize, 12usize, 0.8, 1e-3);
    let params = ModelParams::new(theta, tau, eps, n).unwrap();
    let reps = 10_000usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for r in 0..reps {
        let sample = generate_sequence(&params, RngStream::new(31337, r as u64));
        let ll_shift = log_likelihood(sample.x(), theta + eps * h, tau, eps);
        let ll_true = log_likelihood(sample.x(), theta, tau, eps);
        let d = ll_shift - ll_true;
        sum += d;
        sum_sq += d * d;
    }
    let nf = reps as f64;
    let mean = sum / nf;
    let var = (sum_sq - nf * mean * mean) / (nf - 1.0);
    let target_mean = -h * h * tau as f64 / 2.0;
    let target_var = h * h * tau as f64;
    let se_mean = target_var.sqrt() / nf.sqrt();
    let se_var = target_var * (2.0 / (nf - 1.0)).sqrt();
    assert!(
        (mean - target_mean).abs() <= 5.0 * se_mean,
        "mean {mean} vs {target_mean} (5 SE = {})",
        5.0 * se_mean
    );
    assert!(
        (var - target_var).abs() <= 5.0 * se_var,
        "variance {var} vs {target_var} (5 SE = {})",
        5.0 * se_var
    );
}

#[test]
fn theta_zero_truth_is_still_estimable() {
    // degenerate no-change truth: estimators remain well-defined
    let params = ModelParams::new(0.0, 5, 1.0, 20).unwrap();
    let sample = generate_sequence(&params, RngStream::new(8, 0));
    let est = estimate_all(&sample, &ThetaTau).unwrap();
    assert!((1..=20).contains(&est.tau_mle));
    assert!(est.tau_bayes >= 1.0 && est.tau_bayes <= 20.0);
    assert!(est.l_bayes.is_finite());
}

#[test]
fn worked_example_end_to_end() {
    let sample = sample_from(&[2.0, -1.0, 1.5, 0.1], 1.0);
    let est = estimate_all(&sample, &ThetaTau).unwrap();
    assert_eq!(est.tau_mle, 1);
    assert_eq!(est.theta_mle, 2.0);
    assert_eq!(est.l_mle, 2.0);
    assert_relative_eq!(
        est.tau_bayes,
        {
            // direct evaluation of Σ k p_k from the U statistics
            let stats = CumulativeStats::from_observations(&[2.0, -1.0, 1.5, 0.1], 1.0).unwrap();
            let a: Vec<f64> = stats
                .u()
                .iter()
                .enumerate()
                .map(|(i, &u)| u - 0.5 * ((i + 1) as f64).ln())
                .collect();
            let m = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = a.iter().map(|&v| (v - m).exp()).collect();
            let total: f64 = w.iter().sum();
            w.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v / total).sum()
        },
        max_relative = 1e-14
    );
}
