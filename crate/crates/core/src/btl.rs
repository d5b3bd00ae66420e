//! Bradley-Terry-Luce choice probabilities and the stable logistic
//! primitives used throughout the crate.

use crate::error::{Error, Result};

/// Reward differences are clamped to this magnitude before the logistic is
/// evaluated; the saturation error is below 1e-21, far under every tolerance
/// used by the toolkit.
pub const LOGISTIC_CLAMP: f64 = 50.0;

/// Stable logistic `1 / (1 + exp(-x))`.
///
/// Computed via a single `exp(-|x|)` so it never overflows.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    if x >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

/// Stable `log(sigmoid(x)) = -log(1 + exp(-x))`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    // log(1 + exp(t)) = max(t, 0) + ln_1p(exp(-|t|)) with t = -x.
    let t = -x;
    -(t.max(0.0) + (-t.abs()).exp().ln_1p())
}

/// Probability that an alternative with reward `reward_a` beats one with
/// reward `reward_b` under a BTL model:
/// `exp(rA) / (exp(rA) + exp(rB))`, evaluated as the logistic of `rA - rB`.
///
/// The difference is clamped to [`LOGISTIC_CLAMP`] before exponentiation.
pub fn btl_win_prob(reward_a: f64, reward_b: f64) -> Result<f64> {
    if !reward_a.is_finite() || !reward_b.is_finite() {
        return Err(Error::invalid(format!(
            "btl_win_prob requires finite rewards, got ({reward_a}, {reward_b})"
        )));
    }
    let diff = (reward_a - reward_b).clamp(-LOGISTIC_CLAMP, LOGISTIC_CLAMP);
    Ok(sigmoid(diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matches_closed_form() {
        // exp(0) / (exp(0) + exp(ln 2)) = 1/3
        let p = btl_win_prob(0.0, 2.0_f64.ln()).unwrap();
        assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-15);

        // rational oracle: 100 / (100 + 10)
        let p = btl_win_prob(100.0_f64.ln(), 10.0_f64.ln()).unwrap();
        assert_abs_diff_eq!(p, 100.0 / 110.0, epsilon = 1e-12);
    }

    #[test]
    fn equal_rewards_are_even() {
        for t in [-3.0, 0.0, 0.25, 17.0] {
            assert_eq!(btl_win_prob(t, t).unwrap(), 0.5);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(btl_win_prob(f64::NAN, 0.0).is_err());
        assert!(btl_win_prob(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn antisymmetry() {
        for (a, b) in [(0.0, 1.0), (-4.3, 2.2), (30.0, -30.0)] {
            let p = btl_win_prob(a, b).unwrap();
            let q = btl_win_prob(b, a).unwrap();
            assert_abs_diff_eq!(p + q, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_invariance() {
        for c in [-10.0, 0.1, 5.0] {
            let p = btl_win_prob(1.2, -0.4).unwrap();
            let q = btl_win_prob(1.2 + c, -0.4 + c).unwrap();
            assert_abs_diff_eq!(p, q, epsilon = 1e-12);
        }
    }

    #[test]
    fn log_sigmoid_consistent_with_sigmoid() {
        for x in [-40.0, -3.0, -1e-8, 0.0, 0.7, 12.0] {
            assert_abs_diff_eq!(log_sigmoid(x), sigmoid(x).ln(), epsilon = 1e-12);
        }
        // deep in the tail, the stable form stays finite and linear
        assert_abs_diff_eq!(log_sigmoid(-700.0), -700.0, epsilon = 1e-9);
    }
}
