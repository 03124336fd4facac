//! Closed form for `N = 2`, one retained mode.

use std::f64::consts::LN_2;

/// Below this largest value the power series replaces the closed form.
const SERIES_CUTOFF: f64 = 0.3;

/// Squared values closer than this use the derivative (coincident) limit.
const COINCIDENT: f64 = 1e-10;

/// `(1 - y)^k log(1 - y)`, zero at `y = 1`.
fn pow_log_one_minus(y: f64, k: i32) -> f64 {
    if y >= 1.0 {
        0.0
    } else {
        (1.0 - y).powi(k) * (-y).ln_1p()
    }
}

/// `Ĝ(y) = [(1-y)^3 log(1-y) + (1+y)^3 log(1+y) - (5 + 6 log 2) y^2] / 6`.
pub fn g_hat(y: f64) -> f64 {
    (pow_log_one_minus(y, 3) + (1.0 + y).powi(3) * y.ln_1p() - (5.0 + 6.0 * LN_2) * y * y) / 6.0
}

/// `dĜ/dy = [(1+y)^2 log(1+y) - (1-y)^2 log(1-y)] / 2 - (1 + 2 log 2) y`.
pub fn g_hat_derivative(y: f64) -> f64 {
    0.5 * ((1.0 + y).powi(2) * y.ln_1p() - pow_log_one_minus(y, 2)) - (1.0 + 2.0 * LN_2) * y
}

/// `Ĝ(y) = -y^2 log 2 + sum_(k>=2) c_k y^(2k)`, `c_k = 2 / ((2k)(2k-1)(2k-2)(2k-3))`.
fn series_coefficient(k: usize) -> f64 {
    let t = 2.0 * k as f64;
    2.0 / (t * (t - 1.0) * (t - 2.0) * (t - 3.0))
}

/// Average entropy of the single retained mode for `N = 2` and spectrum
/// `(y1, y2)`: `(Ĝ(y1) - Ĝ(y2)) / (y2^2 - y1^2)`. Symmetric in its arguments.
pub fn two_mode_entropy(y1: f64, y2: f64) -> f64 {
    let (lo, hi) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
    let (a, b) = (lo * lo, hi * hi);
    if hi <= SERIES_CUTOFF {
        // (b^k - a^k) / (b - a) = sum_i a^i b^(k-1-i), stable for any gap.
        let mut sum = 0.0;
        for k in 2..40 {
            let mut quotient = 0.0;
            let mut ai = 1.0;
            for i in 0..k {
                quotient += ai * b.powi((k - 1 - i) as i32);
                ai *= a;
            }
            let term = series_coefficient(k) * quotient;
            sum += term;
            if term <= 1e-18 * sum {
                break;
            }
        }
        return LN_2 - sum;
    }
    if b - a < COINCIDENT {
        let mid = 0.5 * (lo + hi);
        return -g_hat_derivative(mid) / (2.0 * mid);
    }
    (g_hat(lo) - g_hat(hi)) / (b - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // mpmath, 30 digits
        assert!((two_mode_entropy(0.3, 0.8) - 0.629201258394614).abs() < 1e-14);
        assert!((two_mode_entropy(0.0, 0.0) - LN_2).abs() < 1e-16);
    }

    #[test]
    fn swap_symmetry_is_exact() {
        for &(a, b) in &[(0.3, 0.8), (0.1, 0.2), (0.0, 1.0), (0.5, 0.5000001)] {
            assert_eq!(two_mode_entropy(a, b), two_mode_entropy(b, a));
        }
    }

    #[test]
    fn branches_agree_at_switches() {
        // closed form vs series just above the cutoff
        let closed = (g_hat(0.2) - g_hat(0.31)) / (0.31f64.powi(2) - 0.04);
        let series = two_mode_entropy(0.2, 0.31);
        assert!((closed - series).abs() < 1e-12);
        let near = two_mode_entropy(0.6, 0.6 + 1e-12);
        let far = two_mode_entropy(0.6, 0.6 + 1e-5);
        assert!((near - far).abs() < 1e-5);
    }

    #[test]
    fn pure_limit_is_uniform_average() {
        // R_1 is flat on [0, 1] for y1 = y2 = 1, so the mean is int_0^1 s = 1/2.
        let v = two_mode_entropy(1.0, 1.0);
        assert!((v - 0.5).abs() < 1e-15, "{v}");
        assert!(two_mode_entropy(0.9, 1.0).is_finite());
    }

    #[test]
    fn series_matches_closed_form() {
        for &y in &[0.05, 0.1, 0.2, 0.3] {
            let mut s = -LN_2 * y * y;
            for k in 2..40 {
                s += series_coefficient(k) * y.powi(2 * k as i32);
            }
            assert!((s - g_hat(y)).abs() < 1e-15, "y = {y}");
        }
    }
}
