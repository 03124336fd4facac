//! Domain types shared by the three engines: the fixed singular-value
//! spectrum of the global complex structure, the bipartition, and the
//! per-mode entropy function.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Inputs within this distance outside `[0, 1]` are clamped instead of rejected.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Below this distance from 1 the entropy function switches to its
/// leading-order expansion.
const NEAR_PURE: f64 = 1e-8;

/// Bogoliubov singular values at or above this are treated as saturated (`tanh = 1`).
const TANH_SATURATION: f64 = 40.0;

fn clamp_unit(value: f64, what: &str) -> Result<f64> {
    if !value.is_finite() || !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&value) {
        return Err(Error::Domain(format!(
            "{what} = {value} lies outside [0, 1]"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Singular values `y_1 <= ... <= y_N` of the complex structure of the full
/// system, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: impl Into<Vec<f64>>) -> Result<Self> {
        let mut values = values.into();
        if values.is_empty() {
            return Err(Error::Domain(
                "spectrum must contain at least one value".into(),
            ));
        }
        for v in values.iter_mut() {
            *v = clamp_unit(*v, "singular value")?;
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    /// All `n` singular values equal to `y0`.
    pub fn degenerate(n: usize, y0: f64) -> Result<Self> {
        Self::new(vec![y0; n])
    }

    /// Evenly spaced `y_j = (j - 1) / (N - 1)`.
    pub fn linspace(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("linspace spectrum needs N >= 2".into()));
        }
        Self::new(
            (0..n)
                .map(|j| j as f64 / (n - 1) as f64)
                .collect::<Vec<_>>(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// `sum_k y_k^2`.
    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|y| y * y).sum()
    }
}

/// Split of `N = N_A + N_B` fermionic modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    n_a: usize,
}

impl Partition {
    pub fn new(n: usize, n_a: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("bipartition needs N >= 2, got {n}")));
        }
        if n_a == 0 || n_a >= n {
            return Err(Error::Domain(format!(
                "subsystem size must satisfy 1 <= N_A <= N - 1, got N_A = {n_a}, N = {n}"
            )));
        }
        Ok(Self { n, n_a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n - self.n_a
    }

    /// Subsystem fraction `N_A / N`.
    pub fn fraction(&self) -> f64 {
        self.n_a as f64 / self.n as f64
    }
}

/// Subsystem entropies and the mutual information `I = S_A + S_B - S`, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBreakdown {
    s_a: f64,
    s_b: f64,
    s_total: f64,
    mutual_information: f64,
}

impl EntropyBreakdown {
    pub fn new(s_a: f64, s_b: f64, s_total: f64) -> Self {
        Self {
            s_a,
            s_b,
            s_total,
            mutual_information: s_a + s_b - s_total,
        }
    }

    /// Builds the breakdown from entropy deficits `d = m log 2 - S`.
    ///
    /// The mutual information is then `d_total - d_a - d_b`, which is exactly
    /// zero for a maximally mixed state.
    pub fn from_deficits(partition: Partition, d_a: f64, d_b: f64, d_total: f64) -> Self {
        Self {
            s_a: partition.n_a() as f64 * LN_2 - d_a,
            s_b: partition.n_b() as f64 * LN_2 - d_b,
            s_total: partition.n() as f64 * LN_2 - d_total,
            mutual_information: d_total - d_a - d_b,
        }
    }

    pub fn s_a(&self) -> f64 {
        self.s_a
    }

    pub fn s_b(&self) -> f64 {
        self.s_b
    }

    pub fn s_total(&self) -> f64 {
        self.s_total
    }

    pub fn mutual_information(&self) -> f64 {
        self.mutual_information
    }
}

/// Entropy of a single mode with complex-structure singular value `chi`:
/// `s(chi) = -(1+chi)/2 log((1+chi)/2) - (1-chi)/2 log((1-chi)/2)`.
pub fn entropy_kernel(chi: f64) -> Result<f64> {
    clamp_unit(chi, "chi").map(mode_entropy)
}

/// Unchecked `s(chi)`; `chi` is clamped to `[0, 1]`.
pub(crate) fn mode_entropy(chi: f64) -> f64 {
    let chi = chi.clamp(0.0, 1.0);
    let eps = 1.0 - chi;
    if eps < NEAR_PURE {
        if eps == 0.0 {
            return 0.0;
        }
        return 0.5 * eps * (1.0 - (0.5 * eps).ln());
    }
    LN_2 - entropy_deficit(chi)
}

/// `log 2 - s(chi) = (1+chi)/2 log(1+chi) + (1-chi)/2 log(1-chi)`, the
/// distance of a mode from maximal mixing. `chi` is clamped to `[0, 1]`.
pub fn entropy_deficit(chi: f64) -> f64 {
    let chi = chi.clamp(0.0, 1.0);
    let eps = 1.0 - chi;
    if eps < NEAR_PURE {
        return LN_2
            - if eps == 0.0 {
                0.0
            } else {
                0.5 * eps * (1.0 - (0.5 * eps).ln())
            };
    }
    0.5 * (1.0 + chi) * chi.ln_1p() + 0.5 * eps * (-chi).ln_1p()
}

/// Von Neumann entropy `sum_j s(y_j)` of the full Gaussian state.
pub fn total_entropy(spectrum: &Spectrum) -> f64 {
    spectrum.values().iter().map(|&y| mode_entropy(y)).sum()
}

/// Total entropy deficit `N log 2 - S`.
pub fn total_deficit(spectrum: &Spectrum) -> f64 {
    spectrum.values().iter().map(|&y| entropy_deficit(y)).sum()
}

/// Complex-structure spectrum `y_j = tanh(lambda_j)` from the singular values
/// of the Bogoliubov matrix `Q` (`J = i tanh Q`).
pub fn spectrum_from_bogoliubov(lambdas: &[f64]) -> Result<Spectrum> {
    let values = lambdas
        .iter()
        .map(|&l| {
            if l.is_nan() || l < 0.0 {
                Err(Error::Domain(format!(
                    "Bogoliubov singular value {l} is negative"
                )))
            } else if l >= TANH_SATURATION {
                Ok(1.0)
            } else {
                Ok(l.tanh())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn kernel_values() {
        assert_abs_diff_eq!(entropy_kernel(0.0).unwrap(), LN_2, epsilon = 1e-16);
        assert_eq!(entropy_kernel(1.0).unwrap(), 0.0);
        // mpmath, 30 digits
        assert_abs_diff_eq!(
            entropy_kernel(0.5).unwrap(),
            0.562_335_144_618_808_4,
            epsilon = 1e-15
        );
    }

    #[test]
    fn kernel_domain() {
        assert!(entropy_kernel(-1e-6).is_err());
        assert!(entropy_kernel(1.0 + 1e-9).is_err());
        assert!(entropy_kernel(f64::NAN).is_err());
        assert_eq!(entropy_kernel(1.0 + 1e-13).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy_kernel(-1e-13).unwrap(), LN_2, epsilon = 1e-15);
    }

    #[test]
    fn near_pure_is_finite_and_ordered() {
        let mut prev = f64::INFINITY;
        for k in 6..=14 {
            let v = entropy_kernel(1.0 - 10f64.powi(-k)).unwrap();
            assert!(v.is_finite() && v >= 0.0);
            assert!(v < prev, "k = {k}: {v} !< {prev}");
            prev = v;
        }
    }

    #[test]
    fn expansion_matches_direct_form_at_switch() {
        let eps: f64 = 1.01e-8;
        let direct = LN_2 - entropy_deficit(1.0 - eps);
        let series = 0.5 * eps * (1.0 - (0.5 * eps).ln());
        assert!((direct - series).abs() < 1e-14);
    }

    #[test]
    fn total_entropy_limits() {
        let pure = Spectrum::degenerate(5, 1.0).unwrap();
        assert_eq!(total_entropy(&pure), 0.0);
        let mixed = Spectrum::degenerate(5, 0.0).unwrap();
        assert_abs_diff_eq!(total_entropy(&mixed), 5.0 * LN_2, epsilon = 1e-14);
        let two = Spectrum::new(vec![0.6, 0.2]).unwrap();
        let expected = mode_entropy(0.2) + mode_entropy(0.6);
        assert_abs_diff_eq!(total_entropy(&two), expected, epsilon = 1e-15);
        assert_eq!(two.values(), &[0.2, 0.6]);
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![0.5, 1.5]).is_err());
        assert!(Spectrum::new(Vec::<f64>::new()).is_err());
        assert!(Spectrum::linspace(1).is_err());
        let s = Spectrum::new(vec![1.0 + 5e-13, -5e-13]).unwrap();
        assert_eq!(s.values(), &[0.0, 1.0]);
    }

    #[test]
    fn partition_bounds() {
        assert!(Partition::new(1, 1).is_err());
        assert!(Partition::new(4, 0).is_err());
        assert!(Partition::new(4, 4).is_err());
        let p = Partition::new(10, 4).unwrap();
        assert_eq!(p.n_b(), 6);
    }

    #[test]
    fn bogoliubov_bridge() {
        let s = spectrum_from_bogoliubov(&[0.0, 0.0]).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0]);
        let s = spectrum_from_bogoliubov(&[45.0]).unwrap();
        assert_eq!(s.values(), &[1.0]);
        let s = spectrum_from_bogoliubov(&[0.5493061]).unwrap();
        assert_abs_diff_eq!(s.values()[0], 0.5, epsilon = 1e-7);
        assert!(spectrum_from_bogoliubov(&[-0.1]).is_err());
    }

    #[test]
    fn breakdown_identity() {
        let b = EntropyBreakdown::new(1.2, 0.7, 1.5);
        assert_abs_diff_eq!(b.mutual_information(), 0.4, epsilon = 1e-12);
        let p = Partition::new(4, 2).unwrap();
        let b = EntropyBreakdown::from_deficits(p, 0.1, 0.2, 0.5);
        assert_abs_diff_eq!(
            b.mutual_information(),
            b.s_a() + b.s_b() - b.s_total(),
            epsilon = 1e-12
        );
        let zero = EntropyBreakdown::from_deficits(p, 0.0, 0.0, 0.0);
        assert_eq!(zero.mutual_information(), 0.0);
    }

    proptest! {
        #[test]
        fn entropy_is_concave(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let mid = mode_entropy(0.5 * (a + b));
            prop_assert!(mid >= 0.5 * (mode_entropy(a) + mode_entropy(b)) - 1e-12);
        }

        #[test]
        fn entropy_is_decreasing(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(mode_entropy(lo) >= mode_entropy(hi) - 1e-15);
        }
    }
}
