//! Large-`N` behaviour of the averages: fixed subsystem size, fixed
//! subsystem fraction (saddle point), and closed forms at maximal degeneracy.

mod degenerate;
mod saddle;

pub use degenerate::{
    entropy_max_degenerate_limit, f_y_map, macroscopic_density, mutual_info_max_degenerate_limit,
};
pub use saddle::{
    entropy_fraction, entropy_fraction_with, hl_coefficients, multipartite_mean,
    mutual_info_fraction, mutual_info_fraction_with, saddle_h, HlCoefficients, SaddleContext,
    FRACTION_MARGIN, PURITY_MARGIN,
};

use crate::error::{Error, Result};
use crate::numerics::{integrate_semi_infinite, QuadratureSpec};
use crate::state::{total_entropy, Spectrum};

/// Which expansion produced an [`AsymptoticResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderNote {
    FiniteA,
    Fraction,
    MaxDegenerate,
}

impl OrderNote {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderNote::FiniteA => "finite_A",
            OrderNote::Fraction => "fraction",
            OrderNote::MaxDegenerate => "max_degenerate",
        }
    }
}

/// `volume_term * N + constant_term`, up to `O(1/N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticResult {
    /// Coefficient of `N`, in nats per mode.
    pub volume_term: f64,
    /// Order-one part, in nats.
    pub constant_term: f64,
    pub order_note: OrderNote,
}

impl AsymptoticResult {
    pub fn value_at(&self, n: usize) -> f64 {
        n as f64 * self.volume_term + self.constant_term
    }
}

fn check_finite_a(n: usize, n_a: usize, spectrum: &Spectrum) -> Result<()> {
    if n_a == 0 || n < 4 * n_a {
        return Err(Error::Domain(format!(
            "fixed-subsystem expansion needs 1 <= n_a and n >= 4 n_a, got n = {n}, n_a = {n_a}"
        )));
    }
    if spectrum.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: spectrum.n(),
        });
    }
    Ok(())
}

/// `<S_A>` for a subsystem of fixed size `n_a`:
/// `N_A log 2 - N_A (2 N_A - 1) / (4 N^2) sum_l y_l^2`, reported as a
/// constant term.
pub fn entropy_a_finite(n: usize, n_a: usize, spectrum: &Spectrum) -> Result<AsymptoticResult> {
    check_finite_a(n, n_a, spectrum)?;
    let na = n_a as f64;
    let nf = n as f64;
    let correction = na * (2.0 * na - 1.0) / (4.0 * nf * nf) * spectrum.sum_squares();
    Ok(AsymptoticResult {
        volume_term: 0.0,
        constant_term: na * std::f64::consts::LN_2 - correction,
        order_note: OrderNote::FiniteA,
    })
}

/// Guard against spectra whose `t`-integrals become singular at `t = 1`.
fn check_purity(spectrum: &Spectrum) -> Result<()> {
    if spectrum.max() > 1.0 - PURITY_MARGIN {
        return Err(Error::Guard(format!(
            "largest singular value {} exceeds 1 - {PURITY_MARGIN:e}; \
             use the maximal-degeneracy closed forms for (nearly) pure states",
            spectrum.max()
        )));
    }
    Ok(())
}

/// Breakpoints in `t` resolving the structure at `t - 1 ~ 1 - y_max^2`.
pub(crate) fn near_one_breakpoints(spectrum: &Spectrum) -> Vec<f64> {
    let gap = 1.0 - spectrum.max() * spectrum.max();
    let mut out = Vec::new();
    let mut scale = gap;
    while scale < 1.0 {
        out.push(1.0 + scale);
        scale *= 4.0;
    }
    out
}

/// `N_A int_1^inf (sqrt t - 1) m1(t) / (1 + m2(t)) dt` with
/// `m1 = N^-1 sum y^2 / (t - y^2)^2`, `m2 = N^-1 sum y^2 / (t - y^2)`.
fn finite_a_integral(n_a: usize, spectrum: &Spectrum, spec: &QuadratureSpec) -> Result<f64> {
    let squares: Vec<f64> = spectrum.values().iter().map(|y| y * y).collect();
    let inv_n = 1.0 / squares.len() as f64;
    let integrand = |t: f64| {
        let (mut m1, mut m2) = (0.0, 0.0);
        for &z in &squares {
            let d = t - z;
            m2 += z / d;
            m1 += z / (d * d);
        }
        (t.sqrt() - 1.0) * m1 * inv_n / (1.0 + m2 * inv_n)
    };
    let spec = spec
        .clone()
        .with_breakpoints(near_one_breakpoints(spectrum));
    Ok(n_a as f64 * integrate_semi_infinite(integrand, &spec)?)
}

/// `<S_B>` for the large complement of a fixed-size `A`, accurate to `O(1/N)`.
pub fn entropy_b_complement(n: usize, n_a: usize, spectrum: &Spectrum) -> Result<f64> {
    entropy_b_complement_with(n, n_a, spectrum, &QuadratureSpec::default())
}

pub fn entropy_b_complement_with(
    n: usize,
    n_a: usize,
    spectrum: &Spectrum,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_finite_a(n, n_a, spectrum)?;
    check_purity(spectrum)?;
    Ok(
        total_entropy(spectrum) - n_a as f64 * std::f64::consts::LN_2
            + finite_a_integral(n_a, spectrum, spec)?,
    )
}

/// Order-one mutual information between a fixed-size `A` and its complement.
pub fn mutual_info_finite_a(n: usize, n_a: usize, spectrum: &Spectrum) -> Result<f64> {
    mutual_info_finite_a_with(n, n_a, spectrum, &QuadratureSpec::default())
}

pub fn mutual_info_finite_a_with(
    n: usize,
    n_a: usize,
    spectrum: &Spectrum,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_finite_a(n, n_a, spectrum)?;
    check_purity(spectrum)?;
    finite_a_integral(n_a, spectrum, spec)
}
