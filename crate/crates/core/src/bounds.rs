//! Closed-form security bounds for the quantum protocol.
//!
//! Everything here is a pure function of the protocol parameters: the
//! concave single-round cap [`cal_f`], the honest-abort tail
//! [`correctness_delta`], the bias and entropy caps for both cheaters, and
//! the search for the smallest test threshold at which the quantum protocol
//! beats the classical bias floor of one half.
//!
//! Entropies are in bits (base-2 logarithms); the exponential tail bounds
//! use natural logarithms as written.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("parameter {name} = {value} outside its valid range")]
    Domain { name: &'static str, value: f64 },
    #[error("channel fidelity {f0} below test threshold {f_star}: bound vacuous")]
    VacuousCorrectness { f0: f64, f_star: f64 },
}

/// A bound value together with a vacuity flag. A bound is vacuous when it
/// had to be clamped to its trivial limit (1/2 for biases, 0 for entropies)
/// and so carries no information.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub vacuous: bool,
}

impl Bound {
    fn tight(value: f64) -> Self {
        Bound {
            value,
            vacuous: false,
        }
    }

    fn vacuous(value: f64) -> Self {
        Bound {
            value,
            vacuous: true,
        }
    }
}

/// Parameters entering the cheating-Alice bounds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundParams {
    /// String length.
    pub n: u64,
    /// Signal angle in radians.
    pub theta: f64,
    /// Bob's acceptance threshold on the fraction of passed tests.
    pub f_star: f64,
    /// Martingale slack parameter; the bounds hold for every `l > 0`.
    pub l: f64,
}

impl BoundParams {
    pub fn new(n: u64, theta: f64, f_star: f64, l: f64) -> Result<Self, BoundsError> {
        if n == 0 {
            return Err(BoundsError::Domain {
                name: "n",
                value: 0.0,
            });
        }
        if !theta.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(BoundsError::Domain {
                name: "theta",
                value: theta,
            });
        }
        if !(f_star > 0.0 && f_star <= 1.0) {
            return Err(BoundsError::Domain {
                name: "f_star",
                value: f_star,
            });
        }
        if !(l > 0.0) {
            return Err(BoundsError::Domain { name: "l", value: l });
        }
        Ok(Self {
            n,
            theta,
            f_star,
            l,
        })
    }

    /// The default slack `l = sqrt(ln n)`.
    pub fn with_default_l(n: u64, theta: f64, f_star: f64) -> Result<Self, BoundsError> {
        Self::new(n, theta, f_star, default_l(n))
    }
}

/// The slack choice used throughout, `sqrt(ln n)`.
pub fn default_l(n: u64) -> f64 {
    (n as f64).ln().sqrt()
}

/// Binary entropy `h(p) = -p log2 p - (1-p) log2 (1-p)` with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "binary_entropy: p = {p}");
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Hoeffding tail `exp(-l^2 / 2)` for super-martingales with unit increments.
pub fn hoeffding_tail(l: f64) -> f64 {
    assert!(l > 0.0, "hoeffding_tail: l = {l}");
    (-l * l / 2.0).exp()
}

/// The concave decreasing cap on Alice's per-round success probability as a
/// function of the expected test fidelity `y`:
///
/// `F(y) = min{ 1/2 + sqrt(1-y) / (sqrt(2) sin^2 theta) + (1-y) / sin^2 theta, 1 }`.
pub fn cal_f(y: f64, theta: f64) -> Result<f64, BoundsError> {
    if !(0.0..=1.0).contains(&y) {
        return Err(BoundsError::Domain { name: "y", value: y });
    }
    if !theta.is_finite() || theta <= 0.0 || theta > std::f64::consts::FRAC_PI_2 {
        return Err(BoundsError::Domain {
            name: "theta",
            value: theta,
        });
    }
    let sin2 = theta.sin().powi(2);
    let raw = 0.5 + (1.0 - y).sqrt() / (std::f64::consts::SQRT_2 * sin2) + (1.0 - y) / sin2;
    Ok(raw.min(1.0))
}

/// Honest-abort tail `exp(-n (f0 - f*)^2 / 2)` for channel fidelity
/// `f0 >= f*`.
pub fn correctness_delta(n: u64, f0: f64, f_star: f64) -> Result<f64, BoundsError> {
    if f0 < f_star {
        return Err(BoundsError::VacuousCorrectness { f0, f_star });
    }
    Ok((-(n as f64) * (f0 - f_star).powi(2) / 2.0).exp())
}

/// Cheating Bob's bias cap `sin(theta) / 2` from optimal state
/// discrimination.
pub fn bob_bias_bound(theta: f64) -> f64 {
    theta.sin() / 2.0
}

/// Cheating Bob's entropy floor `n h((1 + sin theta) / 2)` in bits.
pub fn bob_entropy_bound(n: u64, theta: f64) -> f64 {
    n as f64 * binary_entropy(0.5 * (1.0 + theta.sin()))
}

/// Cheating Alice's bias cap,
/// `min{ 1/2, 2 exp(-l^2/2) + F(f* - l/sqrt(n)) + l/sqrt(n) - 1/2 }`.
///
/// Returns a vacuous 1/2 when `f* - l/sqrt(n)` falls below zero or the
/// expression exceeds the trivial limit.
pub fn alice_bias_bound(p: &BoundParams) -> Bound {
    let slack = p.l / (p.n as f64).sqrt();
    let arg = p.f_star - slack;
    if arg < 0.0 {
        return Bound::vacuous(0.5);
    }
    let f = cal_f(arg, p.theta).expect("argument validated above");
    let value = 2.0 * hoeffding_tail(p.l) + f + slack - 0.5;
    if value >= 0.5 {
        Bound::vacuous(0.5)
    } else {
        Bound::tight(value)
    }
}

/// Cheating Alice's entropy floor,
/// `max{ 0, -n log2 F(f* - l/sqrt(n)) (1 - exp(-l^2/2)) }` in bits.
pub fn alice_entropy_bound(p: &BoundParams) -> Bound {
    let slack = p.l / (p.n as f64).sqrt();
    let arg = p.f_star - slack;
    if arg < 0.0 {
        return Bound::vacuous(0.0);
    }
    let f = cal_f(arg, p.theta).expect("argument validated above");
    let value = -(p.n as f64) * f.log2() * (1.0 - hoeffding_tail(p.l));
    if value <= 0.0 {
        Bound::vacuous(0.0)
    } else {
        Bound::tight(value)
    }
}

/// Which asymptotic regime a report was generated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Noiseless,
    Noisy,
}

/// Parameter echo stored alongside every report for auditability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportParams {
    pub n: u64,
    pub f_star: f64,
    pub l: f64,
    pub regime: Regime,
    /// Signal setting used for the bias bounds.
    pub sin2_theta_bias: f64,
    /// Signal setting used for the entropy bounds.
    pub sin2_theta_entropy: f64,
    pub channel_fidelity: Option<f64>,
}

/// All evaluated bounds for one parameter point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecurityReport {
    pub eps_a_bound: Bound,
    pub eps_b_bound: Bound,
    pub h_a_bound: Bound,
    pub h_b_bound: Bound,
    pub delta_n: Bound,
    pub params: ReportParams,
}

/// Noiseless-regime report: `f* = 1`, signal angle shrinking with `n`
/// (`sin^2 theta = (ln n / n)^{1/6}` for the bias bounds and
/// `(ln n / n)^{1/8}` for the entropy bounds), slack `l = sqrt(ln n)`.
///
/// Two honest parties over a perfect channel pass every test, so the
/// correctness deviation is exactly zero in this regime.
pub fn theorem_noiseless_report(n: u64) -> Result<SecurityReport, BoundsError> {
    if n < 2 {
        return Err(BoundsError::Domain {
            name: "n",
            value: n as f64,
        });
    }
    let ratio = (n as f64).ln() / n as f64;
    let sin2_bias = ratio.powf(1.0 / 6.0);
    let sin2_entropy = ratio.powf(1.0 / 8.0);
    let theta_bias = sin2_bias.sqrt().asin();
    let theta_entropy = sin2_entropy.sqrt().asin();
    let l = default_l(n);
    let bias_params = BoundParams::new(n, theta_bias, 1.0, l)?;
    let entropy_params = BoundParams::new(n, theta_entropy, 1.0, l)?;
    Ok(SecurityReport {
        eps_a_bound: alice_bias_bound(&bias_params),
        eps_b_bound: Bound::tight(bob_bias_bound(theta_bias)),
        h_a_bound: alice_entropy_bound(&entropy_params),
        h_b_bound: Bound::tight(bob_entropy_bound(n, theta_entropy)),
        delta_n: Bound::tight(0.0),
        params: ReportParams {
            n,
            f_star: 1.0,
            l,
            regime: Regime::Noiseless,
            sin2_theta_bias: sin2_bias,
            sin2_theta_entropy: sin2_entropy,
            channel_fidelity: None,
        },
    })
}

/// Noisy-regime report at fixed `theta` and `f*`, slack `l = sqrt(ln n)`.
///
/// `channel_fidelity` enters only the correctness deviation; when it falls
/// below `f*` the deviation is reported as a vacuous 1.
pub fn theorem_noisy_report(
    n: u64,
    theta: f64,
    f_star: f64,
    channel_fidelity: f64,
) -> Result<SecurityReport, BoundsError> {
    noisy_report_with_l(n, theta, f_star, channel_fidelity, default_l(n))
}

/// [`theorem_noisy_report`] with an explicit slack parameter; the bounds
/// hold for every `l > 0`.
pub fn noisy_report_with_l(
    n: u64,
    theta: f64,
    f_star: f64,
    channel_fidelity: f64,
    l: f64,
) -> Result<SecurityReport, BoundsError> {
    let params = BoundParams::new(n, theta, f_star, l)?;
    if !(0.0..=1.0).contains(&channel_fidelity) {
        return Err(BoundsError::Domain {
            name: "channel_fidelity",
            value: channel_fidelity,
        });
    }
    let delta_n = match correctness_delta(n, channel_fidelity, f_star) {
        Ok(v) => Bound::tight(v),
        Err(_) => Bound::vacuous(1.0),
    };
    let sin2 = theta.sin().powi(2);
    let eps_b = bob_bias_bound(theta);
    Ok(SecurityReport {
        eps_a_bound: alice_bias_bound(&params),
        eps_b_bound: if eps_b >= 0.5 {
            Bound::vacuous(0.5)
        } else {
            Bound::tight(eps_b)
        },
        h_a_bound: alice_entropy_bound(&params),
        h_b_bound: Bound::tight(bob_entropy_bound(n, theta)),
        delta_n,
        params: ReportParams {
            n,
            f_star,
            l: params.l,
            regime: Regime::Noisy,
            sin2_theta_bias: sin2,
            sin2_theta_entropy: sin2,
            channel_fidelity: Some(channel_fidelity),
        },
    })
}

/// Result of the quantum-vs-classical threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ThresholdOutcome {
    /// The smallest `f*` at which `eps_A + eps_B < 1/2`.
    Attainable { f_star: f64 },
    /// Even `f* = 1` does not beat the classical floor at this `n`.
    Unattainable,
}

/// Combined bias cap `eps_A(f*) + eps_B` for the given parameters.
pub fn bias_bound_sum(n: u64, theta: f64, f_star: f64, l: f64) -> Result<f64, BoundsError> {
    let params = BoundParams::new(n, theta, f_star, l)?;
    Ok(alice_bias_bound(&params).value + bob_bias_bound(theta))
}

/// Bisection (to 1e-6) for the minimal `f*` with
/// `eps_A + eps_B < 1/2`, i.e. the point where the quantum bounds beat the
/// classical floor of any bit-string generation protocol.
pub fn quantum_vs_classical_threshold(
    theta: f64,
    n: u64,
    l: f64,
) -> Result<ThresholdOutcome, BoundsError> {
    let beats = |f_star: f64| -> Result<bool, BoundsError> {
        Ok(bias_bound_sum(n, theta, f_star, l)? < 0.5)
    };
    if !beats(1.0)? {
        return Ok(ThresholdOutcome::Unattainable);
    }
    // The Alice bound decreases as f* grows, so the predicate is monotone.
    let mut lo = f64::MIN_POSITIVE;
    let mut hi = 1.0;
    if beats(lo)? {
        return Ok(ThresholdOutcome::Attainable { f_star: lo });
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if beats(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdOutcome::Attainable { f_star: hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

    /// Angle with `sin^2 theta = s2`.
    fn theta_from_sin2(s2: f64) -> f64 {
        s2.sqrt().asin()
    }

    #[test]
    fn cal_f_collapses_to_half_at_full_fidelity() {
        for &theta in &[0.2, 1.0, FRAC_PI_2] {
            assert_abs_diff_eq!(cal_f(1.0, theta).unwrap(), 0.5, epsilon = 0.0);
        }
    }

    #[test]
    fn cal_f_clamps_at_one() {
        // 0.5 + 0.5 + 0.5 exceeds one and is clamped.
        assert_abs_diff_eq!(cal_f(0.5, FRAC_PI_2).unwrap(), 1.0, epsilon = 0.0);
    }

    #[test]
    fn cal_f_high_fidelity_value() {
        // Independent evaluation: 0.5 + 0.1*sqrt(2) + 0.02.
        let theta = theta_from_sin2(0.5);
        let expected = 0.5 + 0.1 * std::f64::consts::SQRT_2 + 0.01 / 0.5;
        assert_abs_diff_eq!(cal_f(0.99, theta).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn cal_f_rejects_domain_violations() {
        assert!(cal_f(-0.1, 1.0).is_err());
        assert!(cal_f(1.1, 1.0).is_err());
        assert!(cal_f(0.5, 0.0).is_err());
        assert!(cal_f(0.5, 2.0).is_err());
    }

    #[test]
    fn cal_f_is_nonincreasing_and_concave() {
        // First and second finite differences on a 10^4-point grid.
        for &s2 in &[1.0, 0.5, 0.1] {
            let theta = theta_from_sin2(s2);
            let grid = 10_000usize;
            let f: Vec<f64> = (0..=grid)
                .map(|i| cal_f(i as f64 / grid as f64, theta).unwrap())
                .collect();
            for w in f.windows(2) {
                assert!(w[1] <= w[0] + 1e-8, "not nonincreasing at sin2={s2}");
            }
            for w in f.windows(3) {
                assert!(
                    w[2] - 2.0 * w[1] + w[0] <= 1e-8,
                    "not concave at sin2={s2}"
                );
            }
        }
    }

    #[test]
    fn correctness_delta_examples() {
        assert_abs_diff_eq!(correctness_delta(500, 0.9, 0.9).unwrap(), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(
            correctness_delta(1000, 0.99, 0.90).unwrap(),
            (-4.05f64).exp(),
            epsilon = 1e-12
        );
        assert!(correctness_delta(10, 0.8, 0.9).is_err());
        // Monotone decrease toward zero as n grows (underflows to exactly
        // zero for large n).
        let mut last = 1.0;
        for k in 1..8 {
            let d = correctness_delta(10u64.pow(k), 0.99, 0.90).unwrap();
            assert!(d <= last && (last == 0.0 || d < last));
            last = d;
        }
    }

    #[test]
    fn bob_bounds_at_the_endpoints() {
        assert_abs_diff_eq!(bob_bias_bound(0.0), 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(bob_entropy_bound(100, 0.0), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bob_bias_bound(FRAC_PI_2), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(bob_entropy_bound(100, FRAC_PI_2), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn bob_bounds_at_pi_over_six() {
        let theta = std::f64::consts::FRAC_PI_6;
        assert_abs_diff_eq!(bob_bias_bound(theta), 0.25, epsilon = 1e-12);
        // h(0.75) evaluated directly.
        assert_abs_diff_eq!(
            bob_entropy_bound(100, theta),
            100.0 * 0.811_278_124_459_132_8,
            epsilon = 1e-9
        );
    }

    #[test]
    fn binary_entropy_values() {
        assert_abs_diff_eq!(binary_entropy(0.5), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(binary_entropy(0.75), 0.811_278_124_459_132_8, epsilon = 1e-12);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
    }

    #[test]
    fn hoeffding_tail_at_sqrt_2_ln_2() {
        assert_abs_diff_eq!(hoeffding_tail((2.0 * 2f64.ln()).sqrt()), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn alice_bias_bound_matches_displayed_noiseless_form() {
        // With f* = 1, sin^2 theta = (ln n / n)^{1/6}, l = sqrt(ln n), the
        // bound reduces algebraically to
        //   (1/sqrt2)(ln n/n)^{1/12} + (ln n/n)^{1/3} + sqrt(ln n/n) + 2/sqrt(n).
        for &n in &[100_000u64, 1_000_000, 100_000_000] {
            let ratio = (n as f64).ln() / n as f64;
            let theta = theta_from_sin2(ratio.powf(1.0 / 6.0));
            let params = BoundParams::with_default_l(n, theta, 1.0).unwrap();
            let bound = alice_bias_bound(&params);
            assert!(!bound.vacuous, "unexpected clamp at n={n}");
            let expected = ratio.powf(1.0 / 12.0) / std::f64::consts::SQRT_2
                + ratio.powf(1.0 / 3.0)
                + ratio.sqrt()
                + 2.0 / (n as f64).sqrt();
            assert_relative_eq!(bound.value, expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn alice_bias_bound_noisy_point() {
        // Direct evaluation at n = 10^6, sin^2 theta = 0.5, f* = 0.99,
        // cross-checked by an independent re-implementation of each term.
        let n = 1_000_000u64;
        let theta = theta_from_sin2(0.5);
        let params = BoundParams::with_default_l(n, theta, 0.99).unwrap();
        let bound = alice_bias_bound(&params);
        let l = (1e6f64).ln().sqrt();
        let slack = l / 1e3;
        let one_minus_y = 1.0 - (0.99 - slack);
        let independent =
            2.0 * (-l * l / 2.0).exp() + one_minus_y.sqrt() * std::f64::consts::SQRT_2 + 2.0 * one_minus_y + slack;
        assert!(!bound.vacuous);
        assert_relative_eq!(bound.value, independent, max_relative = 1e-12);
    }

    #[test]
    fn alice_bias_bound_clamps_to_half() {
        // Tiny theta makes the cap exceed its trivial limit.
        let params = BoundParams::with_default_l(1000, 0.01, 1.0).unwrap();
        let bound = alice_bias_bound(&params);
        assert!(bound.vacuous);
        assert_eq!(bound.value, 0.5);
        // Vacuous-argument regime: f* below the slack.
        let params = BoundParams::new(100, 1.0, 0.05, 2.0).unwrap();
        assert!(alice_bias_bound(&params).vacuous);
    }

    #[test]
    fn alice_entropy_bound_matches_displayed_noiseless_form() {
        for &n in &[10_000u64, 1_000_000] {
            let ratio = (n as f64).ln() / n as f64;
            let sin2 = ratio.powf(1.0 / 8.0);
            let theta = theta_from_sin2(sin2);
            let params = BoundParams::with_default_l(n, theta, 1.0).unwrap();
            let bound = alice_entropy_bound(&params);
            assert!(!bound.vacuous, "unexpected clamp at n={n}");
            let nf = n as f64;
            let inner = 0.5
                + nf.ln().powf(0.25) / (std::f64::consts::SQRT_2 * sin2 * nf.powf(0.25))
                + nf.ln().sqrt() / (nf.sqrt() * sin2);
            let expected = -nf * inner.log2() * (1.0 - 1.0 / nf.sqrt());
            assert_relative_eq!(bound.value, expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn alice_entropy_bound_positive_noisy_point() {
        // n = 10^4, sin^2 theta = 0.5, f* = 0.99: cross-checked directly.
        let n = 10_000u64;
        let theta = theta_from_sin2(0.5);
        let params = BoundParams::with_default_l(n, theta, 0.99).unwrap();
        let bound = alice_entropy_bound(&params);
        assert!(!bound.vacuous);
        let l = (1e4f64).ln().sqrt();
        let slack = l / 100.0;
        let f = cal_f(0.99 - slack, theta).unwrap();
        let expected = -(n as f64) * f.log2() * (1.0 - (-l * l / 2.0).exp());
        assert_relative_eq!(bound.value, expected, max_relative = 1e-12);
        assert!(bound.value > 0.0);
    }

    #[test]
    fn alice_entropy_bound_clamps_to_zero() {
        let params = BoundParams::new(100, 1.0, 0.05, 2.0).unwrap();
        let bound = alice_entropy_bound(&params);
        assert!(bound.vacuous);
        assert_eq!(bound.value, 0.0);
    }

    #[test]
    fn noisy_report_beats_classical_floor_at_large_n() {
        let theta = theta_from_sin2(0.5);
        let report = theorem_noisy_report(1_000_000, theta, 0.999, 1.0).unwrap();
        assert!(report.eps_a_bound.value + report.eps_b_bound.value < 0.5);
    }

    #[test]
    fn noisy_report_tradeoff_endpoints() {
        // theta -> 0: Bob's bias vanishes, Alice's clamps at 1/2.
        let report = theorem_noisy_report(1000, 1e-3, 0.99, 1.0).unwrap();
        assert!(report.eps_b_bound.value < 1e-3);
        assert!(report.eps_a_bound.vacuous);
        assert_eq!(report.eps_a_bound.value, 0.5);
        // Orthogonal signals: Bob's bound is the vacuous 1/2.
        let report = theorem_noisy_report(1000, FRAC_PI_2, 0.99, 1.0).unwrap();
        assert!(report.eps_b_bound.vacuous);
    }

    #[test]
    fn noisy_report_flags_vacuous_correctness() {
        let report = theorem_noisy_report(1000, 1.0, 0.99, 0.95).unwrap();
        assert!(report.delta_n.vacuous);
        let report = theorem_noisy_report(1000, 1.0, 0.90, 0.95).unwrap();
        assert!(!report.delta_n.vacuous);
    }

    #[test]
    fn noiseless_report_bounds_in_range() {
        for &n in &[1_000u64, 1_000_000, 1_000_000_000] {
            let report = theorem_noiseless_report(n).unwrap();
            for b in [report.eps_a_bound, report.eps_b_bound] {
                assert!(b.value >= 0.0 && b.value <= 0.5);
            }
            for b in [report.h_a_bound, report.h_b_bound] {
                assert!(b.value >= 0.0 && b.value <= n as f64);
            }
            assert_eq!(report.delta_n.value, 0.0);
        }
    }

    #[test]
    fn threshold_unattainable_for_orthogonal_signals() {
        let out = quantum_vs_classical_threshold(FRAC_PI_2, 1_000_000, 3.0).unwrap();
        assert_eq!(out, ThresholdOutcome::Unattainable);
    }

    #[test]
    fn threshold_is_monotone_nonincreasing_in_n() {
        let theta = theta_from_sin2(0.5);
        // Too small an n leaves the finite-size penalties above the floor
        // even at f* = 1.
        assert_eq!(
            quantum_vs_classical_threshold(theta, 100_000, default_l(100_000)).unwrap(),
            ThresholdOutcome::Unattainable
        );
        let mut last = 1.0;
        for &n in &[1_000_000u64, 10_000_000, 100_000_000] {
            match quantum_vs_classical_threshold(theta, n, default_l(n)).unwrap() {
                ThresholdOutcome::Attainable { f_star } => {
                    assert!(f_star <= last + 1e-9, "threshold grew at n={n}");
                    last = f_star;
                }
                ThresholdOutcome::Unattainable => panic!("expected attainable at n={n}"),
            }
        }
    }
}
