//! Closed-form asymptotic quadratic risks of the two functional estimates.
//!
//! To first order (the ε² coefficient) the MLE and the generalized-Bayes
//! estimate of a smooth functional have the *same* risk,
//! `Σ_i (∂L/∂θ_i / I_i)²`. They separate at order ε⁴, where the change
//! point enters: the MLE picks up `26/Δ⁴ (∂L/∂τ)²` and the Bayes estimate
//! `16ζ(3)/Δ⁴ (∂L/∂τ)²`, plus curvature terms in θ. For a functional of τ
//! alone the risk ratio is therefore `16ζ(3)/26 = 8ζ(3)/13 ≈ 0.7397`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs to the risk expansion: noise level, Fisher-type norms, jump
/// size, and the derivative values of the functional at the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticInputs {
    pub eps: f64,
    /// Fisher-type norms I₁, I₂ of the two signal branches.
    pub i1: f64,
    pub i2: f64,
    /// Jump size Δ at the change point; must be nonzero.
    pub delta: f64,
    pub dl_dtheta1: f64,
    pub dl_dtheta2: f64,
    pub dl_dtau: f64,
    /// Second derivatives in θ; enter only the ε⁴ terms.
    #[serde(default)]
    pub d2l_dtheta1: f64,
    #[serde(default)]
    pub d2l_dtheta2: f64,
}

impl AsymptoticInputs {
    /// Inputs with all derivative fields zeroed; set the ones that apply.
    pub fn new(eps: f64, i1: f64, i2: f64, delta: f64) -> Self {
        Self {
            eps,
            i1,
            i2,
            delta,
            dl_dtheta1: 0.0,
            dl_dtheta2: 0.0,
            dl_dtau: 0.0,
            d2l_dtheta1: 0.0,
            d2l_dtheta2: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.i1.is_finite() || self.i1 <= 0.0 || !self.i2.is_finite() || self.i2 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "Fisher norms must be positive and finite, got i1 = {}, i2 = {}",
                self.i1, self.i2
            )));
        }
        if !self.delta.is_finite() || self.delta == 0.0 {
            return Err(Error::InvalidParams(format!(
                "jump size delta must be nonzero and finite, got {}",
                self.delta
            )));
        }
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "eps must be positive and finite, got {}",
                self.eps
            )));
        }
        let derivs = [
            self.dl_dtheta1,
            self.dl_dtheta2,
            self.dl_dtau,
            self.d2l_dtheta1,
            self.d2l_dtheta2,
        ];
        if derivs.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParams("derivative inputs must be finite".into()));
        }
        Ok(())
    }
}

/// Coefficients of the risk expansions `risk = ε²·first + ε⁴·second + o(ε⁴)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskExpansion {
    /// Shared ε² coefficient; one expression serves both estimators.
    pub first_order: f64,
    pub second_order_mle: f64,
    pub second_order_bayes: f64,
    /// Limit of the Bayes/MLE risk ratio as ε → 0: 1 whenever the first
    /// order is present, otherwise the ratio of second orders.
    pub ratio_limit: f64,
}

impl RiskExpansion {
    /// Evaluated MLE risk at the given noise level (remainder dropped).
    pub fn risk_mle_at(&self, eps: f64) -> f64 {
        let e2 = eps * eps;
        e2 * self.first_order + e2 * e2 * self.second_order_mle
    }

    /// Evaluated Bayes risk at the given noise level (remainder dropped).
    pub fn risk_bayes_at(&self, eps: f64) -> f64 {
        let e2 = eps * eps;
        e2 * self.first_order + e2 * e2 * self.second_order_bayes
    }
}

/// Computes the expansion. Errors if every derivative input is zero, in
/// which case no ratio is defined.
pub fn risk_expansion(inputs: &AsymptoticInputs) -> Result<RiskExpansion> {
    inputs.validate()?;
    let all_zero = inputs.dl_dtheta1 == 0.0
        && inputs.dl_dtheta2 == 0.0
        && inputs.dl_dtau == 0.0
        && inputs.d2l_dtheta1 == 0.0
        && inputs.d2l_dtheta2 == 0.0;
    if all_zero {
        return Err(Error::DegenerateRiskInputs);
    }

    let sq = |x: f64| x * x;
    let first_order = sq(inputs.dl_dtheta1 / inputs.i1) + sq(inputs.dl_dtheta2 / inputs.i2);

    let d4 = sq(sq(inputs.delta));
    let tau_term = sq(inputs.dl_dtau) / d4;
    let (i1_2, i2_2) = (sq(inputs.i1), sq(inputs.i2));
    let (i1_4, i2_4) = (sq(i1_2), sq(i2_2));

    let second_order_mle =
        26.0 * tau_term + 3.0 / i1_4 * sq(inputs.d2l_dtheta1) + 3.0 / i2_4 * sq(inputs.d2l_dtheta2);
    let second_order_bayes = 16.0 * zeta3() * tau_term
        + (i1_4 + 2.0 * i1_2 + 3.0) / i1_4 * sq(inputs.d2l_dtheta1)
        + (i2_4 + 2.0 * i2_2 + 3.0) / i2_4 * sq(inputs.d2l_dtheta2);

    let ratio_limit = if first_order > 0.0 {
        1.0
    } else {
        second_order_bayes / second_order_mle
    };

    Ok(RiskExpansion { first_order, second_order_mle, second_order_bayes, ratio_limit })
}

/// ζ(3) by direct series summation with an Euler–Maclaurin tail, accurate
/// to well under 1e-12; computed once, not hard-coded.
pub fn zeta3() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        const N: u64 = 1_000_000;
        // ascending magnitudes keep the partial sum accurate to a few ulps
        let mut sum = 0.0;
        for k in (1..=N).rev() {
            let kf = k as f64;
            sum += 1.0 / (kf * kf * kf);
        }
        let m = (N + 1) as f64;
        let m2 = m * m;
        // tail from Euler-Maclaurin at m = N+1: 1/(2m^2) + 1/(2m^3) + 1/(4m^4)
        sum + 0.5 / m2 + 0.5 / (m2 * m) + 0.25 / (m2 * m2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zeta3_against_independent_bracket() {
        // independent oracle: partial sum to 1e6 with integral bounds
        // int_{N+1} x^-3 dx <= tail <= int_N x^-3 dx
        const N: u64 = 1_000_000;
        let mut partial = 0.0;
        for k in (1..=N).rev() {
            let kf = k as f64;
            partial += 1.0 / (kf * kf * kf);
        }
        let lower = partial + 0.5 / ((N + 1) as f64).powi(2);
        let upper = partial + 0.5 / (N as f64).powi(2);
        let z = zeta3();
        assert!(z >= lower - 1e-12 && z <= upper + 1e-12, "zeta3 = {z}");
        // frozen 40-digit reference value, truncated
        assert!((z - 1.2020569031595942854).abs() <= 1e-12);
    }

    #[test]
    fn classical_ratio_constants() {
        assert_relative_eq!(8.0 * zeta3() / 13.0, 0.7397273250212888, max_relative = 1e-12);
        let sixteen = 16.0 * zeta3();
        assert!((19.0..=20.0).contains(&sixteen), "16 zeta(3) = {sixteen}");
    }

    #[test]
    fn pure_tau_functional_reaches_the_classical_ratio() {
        let mut inputs = AsymptoticInputs::new(0.1, 1.0, 1.0, 1.0);
        inputs.dl_dtau = 1.0;
        let exp = risk_expansion(&inputs).unwrap();
        assert_eq!(exp.first_order, 0.0);
        assert_relative_eq!(exp.ratio_limit, 8.0 * zeta3() / 13.0, max_relative = 1e-12);
        assert_relative_eq!(exp.ratio_limit, 0.7397273250212888, max_relative = 1e-12);
    }

    #[test]
    fn first_order_dominates_the_ratio() {
        let mut inputs = AsymptoticInputs::new(0.1, 1.0, 1.0, 1.0);
        inputs.dl_dtheta1 = 1.0;
        inputs.dl_dtheta2 = 1.0;
        let exp = risk_expansion(&inputs).unwrap();
        assert_eq!(exp.first_order, 2.0);
        assert_eq!(exp.ratio_limit, 1.0);
    }

    #[test]
    fn second_order_substitution_example() {
        // delta = 1, dL/dtau = 1, d2L/dtheta1 = 1, I1 = 1:
        // mle 26 + 3 = 29; bayes 16 zeta(3) + 6
        let mut inputs = AsymptoticInputs::new(0.1, 1.0, 1.0, 1.0);
        inputs.dl_dtau = 1.0;
        inputs.d2l_dtheta1 = 1.0;
        let exp = risk_expansion(&inputs).unwrap();
        assert_eq!(exp.second_order_mle, 29.0);
        assert_relative_eq!(exp.second_order_bayes, 16.0 * zeta3() + 6.0, max_relative = 1e-14);
        assert_relative_eq!(exp.second_order_bayes, 25.2329104505535086, max_relative = 1e-12);
        assert!((exp.second_order_bayes - 25.233).abs() < 5e-4);
    }

    #[test]
    fn coefficients_are_nonnegative_and_finite() {
        let cases = [
            (0.3, 1.0, 2.0, -1.5, 0.7, -0.2, 3.0, 0.1, -0.4),
            (1.0, 0.5, 0.5, 0.1, -2.0, 2.0, -3.0, 1.0, 1.0),
        ];
        for (eps, i1, i2, delta, d1, d2, dt, s1, s2) in cases {
            let inputs = AsymptoticInputs {
                eps,
                i1,
                i2,
                delta,
                dl_dtheta1: d1,
                dl_dtheta2: d2,
                dl_dtau: dt,
                d2l_dtheta1: s1,
                d2l_dtheta2: s2,
            };
            let exp = risk_expansion(&inputs).unwrap();
            for c in [exp.first_order, exp.second_order_mle, exp.second_order_bayes] {
                assert!(c.is_finite() && c >= 0.0, "coefficient {c}");
            }
            assert!(exp.risk_mle_at(eps) >= 0.0);
            assert!(exp.risk_bayes_at(eps) >= 0.0);
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let inputs = AsymptoticInputs::new(0.1, 1.0, 1.0, 1.0);
        assert!(matches!(risk_expansion(&inputs), Err(Error::DegenerateRiskInputs)));
        let mut bad = AsymptoticInputs::new(0.1, 1.0, 1.0, 0.0);
        bad.dl_dtau = 1.0;
        assert!(matches!(risk_expansion(&bad), Err(Error::InvalidParams(_))));
    }
}
