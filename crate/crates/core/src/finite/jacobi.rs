//! Maximally degenerate spectra `y_1 = ... = y_N = y0`: the projected
//! singular values are those of a pure state rescaled by `y0`, described by
//! a Jacobi-polynomial kernel.

use crate::error::{Error, Result};
use crate::numerics::{integrate, ln_factorial, QuadratureSpec};
use crate::state::{entropy_deficit, EntropyBreakdown, Partition};

/// Kernel `K(x1, x2) = sum_(j < n_small) ψ_j(x1) ψ_j(x2)` on `[0, 1]` with
/// `ψ_j(x) = (1 - x^2)^(ν/2) P_(2j)^(ν,ν)(x) / sqrt(c_j)`, `ν = n_large - n_small`.
#[derive(Debug, Clone)]
pub struct JacobiKernel {
    n_small: usize,
    n_large: usize,
    y0: f64,
    /// `log c_j` for `j = 0..n_small`.
    log_norms: Vec<f64>,
}

/// Level density at a point; `y0 = 0` collapses the whole spectrum onto zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue {
    Continuous(f64),
    PointMassAtZero { mass: f64 },
}

impl JacobiKernel {
    pub fn new(n_a: usize, n_b: usize, y0: f64) -> Result<Self> {
        if n_a == 0 || n_a > n_b {
            return Err(Error::Domain(format!(
                "Jacobi kernel needs 1 <= n_a <= n_b, got n_a = {n_a}, n_b = {n_b}"
            )));
        }
        if !(0.0..=1.0).contains(&y0) {
            return Err(Error::Domain(format!("scale y0 = {y0} outside [0, 1]")));
        }
        let nu = (n_b - n_a) as u64;
        let log_norms = (0..n_a as u64)
            .map(|j| {
                (2 * nu) as f64 * std::f64::consts::LN_2 + 2.0 * ln_factorial(2 * j + nu)
                    - ln_factorial(2 * j)
                    - ln_factorial(2 * j + 2 * nu)
                    - ((4 * j + 2 * nu + 1) as f64).ln()
            })
            .collect();
        Ok(Self {
            n_small: n_a,
            n_large: n_b,
            y0,
            log_norms,
        })
    }

    pub fn n_small(&self) -> usize {
        self.n_small
    }

    pub fn n_large(&self) -> usize {
        self.n_large
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    fn nu(&self) -> usize {
        self.n_large - self.n_small
    }

    /// `log c_j`.
    pub fn log_norms(&self) -> &[f64] {
        &self.log_norms
    }

    /// `ψ_j(x)` from the three-term recurrence of `P_n^(ν,ν)`.
    pub fn psi(&self, j: usize, x: f64) -> f64 {
        let nu = self.nu() as f64;
        let degree = 2 * j;
        let mut p_prev = 1.0;
        let mut p = (nu + 1.0) * x;
        if degree == 0 {
            p = 1.0;
        }
        for n in 2..=degree {
            let nf = n as f64;
            let s = 2.0 * nf + 2.0 * nu;
            let next = ((s - 1.0) * s * (s - 2.0) * x * p
                - 2.0 * (nf + nu - 1.0).powi(2) * s * p_prev)
                / (2.0 * nf * (nf + 2.0 * nu) * (s - 2.0));
            p_prev = p;
            p = next;
        }
        let envelope = 0.5 * nu * (-x * x).ln_1p() - 0.5 * self.log_norms[j];
        envelope.exp() * p
    }

    /// `K(x, x)` on `[0, 1]` through the orthonormal recurrence of
    /// `(1 - x^2)^(ν/2) p_n(x)`, which avoids the large intermediate
    /// values of the unnormalized polynomials.
    pub fn diagonal(&self, x: f64) -> f64 {
        if !(0.0..1.0).contains(&x) {
            return if x == 1.0 && self.nu() == 0 {
                (0..self.n_small).map(|j| self.psi(j, 1.0).powi(2)).sum()
            } else {
                0.0
            };
        }
        let nu = self.nu() as f64;
        let nu_int = self.nu() as u64;
        let log_h0 = (2.0 * nu + 1.0) * std::f64::consts::LN_2 + 2.0 * ln_factorial(nu_int)
            - ln_factorial(2 * nu_int + 1);
        let b = |n: usize| -> f64 {
            let nf = n as f64;
            (nf * (nf + 2.0 * nu) / ((2.0 * nf + 2.0 * nu + 1.0) * (2.0 * nf + 2.0 * nu - 1.0)))
                .sqrt()
        };
        let mut prev = 0.0;
        let mut cur = (0.5 * nu * (-x * x).ln_1p() - 0.5 * log_h0).exp();
        let mut sum = cur * cur;
        for n in 1..2 * self.n_small - 1 {
            let next = (x * cur - b(n - 1) * prev) / b(n);
            prev = cur;
            cur = next;
            if n % 2 == 0 {
                sum += cur * cur;
            }
        }
        2.0 * sum
    }

    /// Density of the `n_small` singular values at `x`:
    /// `K(x / y0, x / y0) / y0`, zero above `y0`.
    pub fn density(&self, x: f64) -> DensityValue {
        if self.y0 == 0.0 {
            return DensityValue::PointMassAtZero {
                mass: self.n_small as f64,
            };
        }
        if x < 0.0 || x > self.y0 {
            return DensityValue::Continuous(0.0);
        }
        DensityValue::Continuous(self.diagonal(x / self.y0) / self.y0)
    }

    /// Quadrature settings for integrands weighted by the unscaled kernel.
    pub fn quadrature_spec(&self, base: &QuadratureSpec) -> QuadratureSpec {
        let mut spec = base.clone();
        // The kernel concentrates within ~1/sqrt(ν) of the origin.
        let width = 4.0 / ((self.nu() + 1) as f64).sqrt();
        if width < 1.0 {
            spec.breakpoints.push(width);
            spec.breakpoints.push(0.25 * width);
        }
        spec
    }

    /// `int_0^1 K(x, x) g(y0 x) dx` (mean of `sum_j g(x_j)` over the small block).
    pub fn linear_statistic<G: Fn(f64) -> f64>(&self, g: G, spec: &QuadratureSpec) -> Result<f64> {
        integrate(
            |x| self.diagonal(x) * g(self.y0 * x),
            0.0,
            1.0,
            &self.quadrature_spec(spec),
        )
    }
}

/// Density of a [`JacobiKernel`] ensemble at `x`.
pub fn jacobi_density(kernel: &JacobiKernel, x: f64) -> DensityValue {
    kernel.density(x)
}

/// Exact averages for a maximally degenerate spectrum `y0 * 1_N`.
pub fn max_degenerate_breakdown(n: usize, n_a: usize, y0: f64) -> Result<EntropyBreakdown> {
    max_degenerate_breakdown_with(n, n_a, y0, &QuadratureSpec::default())
}

pub fn max_degenerate_breakdown_with(
    n: usize,
    n_a: usize,
    y0: f64,
    spec: &QuadratureSpec,
) -> Result<EntropyBreakdown> {
    let partition = Partition::new(n, n_a)?;
    if !(0.0..=1.0).contains(&y0) {
        return Err(Error::Domain(format!(
            "degenerate value y0 = {y0} outside [0, 1]"
        )));
    }
    let n_small = n_a.min(partition.n_b());
    let n_large = n - n_small;
    let kernel = JacobiKernel::new(n_small, n_large, y0)?;
    let mode_deficit = entropy_deficit(y0);
    let d_small = if y0 == 0.0 {
        0.0
    } else {
        kernel.linear_statistic(entropy_deficit, spec)?
    };
    // The larger block carries the extra |N_A - N_B| singular values at y0.
    let d_large = d_small + (n_large - n_small) as f64 * mode_deficit;
    let (d_a, d_b) = if n_a <= partition.n_b() {
        (d_small, d_large)
    } else {
        (d_large, d_small)
    };
    Ok(EntropyBreakdown::from_deficits(
        partition,
        d_a,
        d_b,
        n as f64 * mode_deficit,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::mode_entropy;
    use std::f64::consts::LN_2;

    #[test]
    fn explicit_and_recurrence_forms_agree() {
        for &(na, nb) in &[(1usize, 1usize), (3, 5), (2, 9), (4, 4)] {
            let k = JacobiKernel::new(na, nb, 1.0).unwrap();
            for i in 0..20 {
                let x = i as f64 / 20.0;
                let explicit: f64 = (0..na).map(|j| k.psi(j, x).powi(2)).sum();
                let fast = k.diagonal(x);
                assert!(
                    (explicit - fast).abs() < 1e-11 * (1.0 + fast),
                    "({na},{nb}) x={x}"
                );
            }
        }
    }

    #[test]
    fn normalization_and_support() {
        let k = JacobiKernel::new(3, 5, 0.7).unwrap();
        let spec = QuadratureSpec::default();
        let total = integrate(
            |x| match k.density(x) {
                DensityValue::Continuous(v) => v,
                DensityValue::PointMassAtZero { .. } => f64::NAN,
            },
            0.0,
            0.7,
            &spec,
        )
        .unwrap();
        assert!((total - 3.0).abs() < 1e-8, "{total}");
        assert_eq!(k.density(0.71), DensityValue::Continuous(0.0));
    }

    #[test]
    fn density_rescales_with_y0() {
        let unit = JacobiKernel::new(2, 6, 1.0).unwrap();
        let scaled = JacobiKernel::new(2, 6, 0.6).unwrap();
        for i in 0..30 {
            let x = 0.6 * i as f64 / 30.0;
            let (DensityValue::Continuous(a), DensityValue::Continuous(b)) =
                (scaled.density(x), unit.density(x / 0.6))
            else {
                panic!("unexpected point mass");
            };
            assert!((a - b / 0.6).abs() < 1e-12 * (1.0 + a));
        }
    }

    #[test]
    fn zero_scale_is_point_mass() {
        let k = JacobiKernel::new(2, 3, 0.0).unwrap();
        assert_eq!(k.density(0.1), DensityValue::PointMassAtZero { mass: 2.0 });
    }

    #[test]
    fn breakdown_limits() {
        let b = max_degenerate_breakdown(6, 2, 0.0).unwrap();
        assert!((b.s_a() - 2.0 * LN_2).abs() < 1e-15);
        assert!((b.s_b() - 4.0 * LN_2).abs() < 1e-15);
        assert_eq!(b.mutual_information(), 0.0);

        let b = max_degenerate_breakdown(10, 4, 1.0).unwrap();
        assert!(b.s_total().abs() < 1e-15);
        assert!((b.s_a() - b.s_b()).abs() < 1e-10);
        assert!((b.mutual_information() - 2.0 * b.s_a()).abs() < 1e-10);
    }

    #[test]
    fn spectral_relation_between_blocks() {
        let y0 = 0.7;
        let b = max_degenerate_breakdown(10, 4, y0).unwrap();
        assert!((b.s_b() - b.s_a() - 2.0 * mode_entropy(y0)).abs() < 1e-12);
        let swapped = max_degenerate_breakdown(10, 6, y0).unwrap();
        assert!((swapped.s_a() - b.s_b()).abs() < 1e-14);
        assert!((swapped.mutual_information() - b.mutual_information()).abs() < 1e-14);
    }

    #[test]
    fn single_pure_mode_pair_is_uniform() {
        // N = 2, N_A = 1, y0 = 1: R_1 = 1 on [0, 1] and <S_A> = int s = 1/2.
        let b = max_degenerate_breakdown(2, 1, 1.0).unwrap();
        assert!((b.s_a() - 0.5).abs() < 1e-9, "{}", b.s_a());
    }
}
