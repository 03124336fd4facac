//! Constant subsystem fraction `f = N_A / N`: saddle-point expansion of the
//! average entropy to volume and constant order.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use rayon::prelude::*;

use super::{mutual_info_finite_a_with, near_one_breakpoints, AsymptoticResult, OrderNote};
use crate::error::{Error, Result};
use crate::numerics::{
    find_root_bracketed, integrate_semi_infinite, GaussLegendre, QuadratureSpec,
};
use crate::state::{total_entropy, Spectrum};

/// Spectra must satisfy `y_max <= 1 - PURITY_MARGIN`.
pub const PURITY_MARGIN: f64 = 1e-6;

/// Fractions must lie in `[FRACTION_MARGIN, 1 - FRACTION_MARGIN]`.
pub const FRACTION_MARGIN: f64 = 1e-4;

const ROOT_TOLERANCE: f64 = 1e-15;
const IDENTITY_TOLERANCE: f64 = 1e-9;
const INNER_NODES: usize = 64;

/// Fraction and spectrum of a fixed-fraction expansion. Equal singular
/// values are merged so the spectral sums cost one term per distinct value.
#[derive(Debug, Clone)]
pub struct SaddleContext {
    f: f64,
    spectrum: Spectrum,
    /// `(y^2, multiplicity / N)`.
    groups: Vec<(f64, f64)>,
}

impl SaddleContext {
    pub fn new(spectrum: &Spectrum, f: f64) -> Result<Self> {
        if !(FRACTION_MARGIN..=1.0 - FRACTION_MARGIN).contains(&f) {
            return Err(Error::Guard(format!(
                "fraction {f} outside [{FRACTION_MARGIN:e}, 1 - {FRACTION_MARGIN:e}]; \
                 use the fixed-subsystem formulas"
            )));
        }
        if spectrum.max() > 1.0 - PURITY_MARGIN {
            return Err(Error::Guard(format!(
                "largest singular value {} exceeds 1 - {PURITY_MARGIN:e}; \
                 use the maximal-degeneracy closed forms for (nearly) pure states",
                spectrum.max()
            )));
        }
        let weight = 1.0 / spectrum.n() as f64;
        let mut groups: Vec<(f64, f64)> = Vec::new();
        for &y in spectrum.values() {
            let z = y * y;
            match groups.last_mut() {
                Some((last, w)) if *last == z => *w += weight,
                _ => groups.push((z, weight)),
            }
        }
        Ok(Self {
            f,
            spectrum: spectrum.clone(),
            groups,
        })
    }

    pub fn fraction(&self) -> f64 {
        self.f
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `N^-1 sum_k term(y_k^2)`.
    fn mean<F: Fn(f64) -> f64>(&self, term: F) -> f64 {
        self.groups.iter().map(|&(z, w)| w * term(z)).sum()
    }

    /// Stationarity condition whose root in `(0, 1)` is the saddle point.
    pub fn stationarity(&self, t: f64, u: f64, lambda: f64) -> f64 {
        let f = self.f;
        f / lambda - (1.0 - f) / (1.0 - lambda)
            + u * self.mean(|z| lambda * z / (t - lambda * lambda * z))
    }
}

fn check_point(t: f64, u: f64) -> Result<()> {
    if t.is_nan() || t < 1.0 || !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!(
            "saddle point needs t >= 1 and u in [0, 1], got t = {t}, u = {u}"
        )));
    }
    Ok(())
}

/// Saddle point `h(f, y, t, u)`: the root in `[f, 1)` of the stationarity
/// condition.
pub fn saddle_h(ctx: &SaddleContext, t: f64, u: f64) -> Result<f64> {
    check_point(t, u)?;
    let vanishing_sum = ctx.groups.iter().all(|&(z, _)| z == 0.0);
    if u == 0.0 || t == f64::INFINITY || vanishing_sum {
        return Ok(ctx.f);
    }
    let h = find_root_bracketed(
        |lambda| ctx.stationarity(t, u, lambda),
        1e-14,
        1.0 - 1e-14,
        ROOT_TOLERANCE,
    )?;
    Ok(h.max(ctx.f))
}

/// Prefactor and exponent coefficients of the Gaussian expansion around the
/// saddle point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HlCoefficients {
    pub h00: f64,
    pub h10: f64,
    pub h01: f64,
    pub h20: f64,
    pub h11: f64,
    pub h02: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

/// All nine coefficients at `(t, u, h)`. The two reduction identities
/// `H10 - H01 = -H00 / h` and `H20 - H02 = -H10 / h` are verified.
pub fn hl_coefficients(ctx: &SaddleContext, t: f64, u: f64, h: f64) -> Result<HlCoefficients> {
    check_point(t, u)?;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("saddle value {h} outside (0, 1)")));
    }
    let f = ctx.f;
    let (h2, h3, h4, h5) = (h * h, h * h * h, h.powi(4), h.powi(5));
    let g = 1.0 - h;
    let pre = (t.sqrt() - 1.0) / t;
    let d = |z: f64| t - h2 * z;

    let h00 = pre / (g * g) * ctx.mean(|z| h * z / d(z));
    let h10 = pre / g.powi(3) * ctx.mean(|z| h * z / d(z).powi(2) * (t + z * h - 2.0 * z * h2));
    let h01 = pre / g.powi(3) * ctx.mean(|z| z * (t - h3 * z) / d(z).powi(2));
    let h20 = pre / (6.0 * g.powi(4))
        * ctx.mean(|z| {
            h * z / d(z).powi(3)
                * (6.0 * t * t + 3.0 * t * z + (5.0 * z * z - 15.0 * t * z) * h2
                    - 16.0 * z * z * h3
                    + 17.0 * z * z * h4)
        });
    let h11 = pre / (3.0 * g.powi(4))
        * ctx.mean(|z| {
            z / d(z).powi(3)
                * (3.0 * t * t + 3.0 * t * z * h - 6.0 * t * z * h2 + (z * z - 3.0 * t * z) * h3
                    - 5.0 * z * z * h4
                    + 7.0 * z * z * h5)
        });
    let h02 = pre / (6.0 * g.powi(4))
        * ctx.mean(|z| {
            z / d(z).powi(3)
                * (6.0 * t * t + 9.0 * t * z * h - 24.0 * t * z * h2
                    + (3.0 * t * z - z * z) * h3
                    + 2.0 * z * z * h4
                    + 5.0 * z * z * h5)
        });

    let l2 = f / h2 + (1.0 - f) / (g * g) - u * ctx.mean(|z| z * (t + z * h2) / d(z).powi(2));
    let l3 = -2.0 / 3.0
        * (f / h3 - (1.0 - f) / g.powi(3)
            + u * ctx.mean(|z| z * z * h / d(z).powi(3) * (3.0 * t + z * h2)));
    let l4 = 0.5
        * (f / h4 + (1.0 - f) / g.powi(4)
            - u * ctx.mean(|z| z * z / d(z).powi(4) * (t * t + 6.0 * t * z * h2 + z * z * h4)));

    let first = (h10 - h01) + h00 / h;
    let second = (h20 - h02) + h10 / h;
    let scale =
        1.0 + (h00 / h).abs() + (h10 / h).abs() + h10.abs() + h01.abs() + h20.abs() + h02.abs();
    if first.abs() > IDENTITY_TOLERANCE * scale || second.abs() > IDENTITY_TOLERANCE * scale {
        return Err(Error::Invariant(format!(
            "saddle coefficient identities violated at t = {t}, u = {u}, h = {h}: \
             defects {first:e}, {second:e}"
        )));
    }
    Ok(HlCoefficients {
        h00,
        h10,
        h01,
        h20,
        h11,
        h02,
        l2,
        l3,
        l4,
    })
}

/// Semi-infinite `t`-integral of a fallible integrand.
fn integrate_t<F: Fn(f64) -> Result<f64>>(
    ctx: &SaddleContext,
    g: F,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut breakpoints = near_one_breakpoints(&ctx.spectrum);
    let top = ctx.spectrum.max();
    if top > 0.0 {
        breakpoints.push(1.0 / (top * top));
    }
    let spec = spec.clone().with_breakpoints(breakpoints);
    let failure = RefCell::new(None);
    let value = integrate_semi_infinite(
        |t| match g(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        &spec,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    value
}

/// `N S_1 + S_0` for a block holding the fraction `ctx.fraction()` of the modes.
/// Use [`AsymptoticResult::value_at`] for the combined value at a given `N`.
pub fn entropy_fraction(ctx: &SaddleContext) -> Result<AsymptoticResult> {
    entropy_fraction_with(ctx, &QuadratureSpec::default())
}

pub fn entropy_fraction_with(
    ctx: &SaddleContext,
    spec: &QuadratureSpec,
) -> Result<AsymptoticResult> {
    let f = ctx.f;
    let volume_integral = integrate_t(
        ctx,
        |t| {
            let h = saddle_h(ctx, t, 1.0)?;
            Ok((t.sqrt() - 1.0) * (h - f) / (t * (1.0 - h)))
        },
        spec,
    )?;
    let rule = GaussLegendre::cached(INNER_NODES);
    let constant_integral = integrate_t(
        ctx,
        |t| {
            let terms: Vec<Result<f64>> = rule
                .nodes()
                .par_iter()
                .zip(rule.weights().par_iter())
                .map(|(&node, &weight)| {
                    let u = 0.5 * (node + 1.0);
                    let h = saddle_h(ctx, t, u)?;
                    let c = hl_coefficients(ctx, t, u, h)?;
                    let value = (c.h10 / (2.0 * c.l2 * c.l2)
                        - 3.0 * c.l3 * c.h00 / (4.0 * c.l2.powi(3)))
                        / h;
                    Ok(0.5 * weight * value)
                })
                .collect();
            terms.into_iter().sum()
        },
        spec,
    )?;
    Ok(AsymptoticResult {
        volume_term: f * LN_2 - 0.5 * volume_integral,
        constant_term: 0.5 * (1.0 - f) * constant_integral,
        order_note: OrderNote::Fraction,
    })
}

/// `sum_k s(y_k)` rescaled to `n` modes.
fn entropy_at(spectrum: &Spectrum, n: usize) -> f64 {
    let total = total_entropy(spectrum);
    if n == spectrum.n() {
        total
    } else {
        total * n as f64 / spectrum.n() as f64
    }
}

/// Average mutual information between a fraction `f` and its complement at
/// size `n`. Fractions within [`FRACTION_MARGIN`] of 0 or 1 fall back to the
/// fixed-subsystem formula.
pub fn mutual_info_fraction(spectrum: &Spectrum, f: f64, n: usize) -> Result<f64> {
    mutual_info_fraction_with(spectrum, f, n, &QuadratureSpec::default())
}

pub fn mutual_info_fraction_with(
    spectrum: &Spectrum,
    f: f64,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Domain(format!("fraction {f} outside (0, 1)")));
    }
    let small = f.min(1.0 - f);
    if small < FRACTION_MARGIN {
        let n_a = (small * n as f64).round() as usize;
        if n_a == 0 {
            return Ok(0.0);
        }
        return mutual_info_finite_a_with(n, n_a, spectrum, spec);
    }
    multipartite_mean_with(spectrum, &[small, 1.0 - small], n, spec)
}

/// Mean of `sum_j S_j - S_total` for `L` blocks with the given fractions.
pub fn multipartite_mean(spectrum: &Spectrum, fractions: &[f64], n: usize) -> Result<f64> {
    multipartite_mean_with(spectrum, fractions, n, &QuadratureSpec::default())
}

fn multipartite_mean_with(
    spectrum: &Spectrum,
    fractions: &[f64],
    n: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if fractions.len() < 2 {
        return Err(Error::Domain("need at least two blocks".into()));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("fractions sum to {sum}, not 1")));
    }
    let mut sorted = fractions.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = 0.0;
    for &f in &sorted {
        let ctx = SaddleContext::new(spectrum, f)?;
        out += entropy_fraction_with(&ctx, spec)?.value_at(n);
    }
    Ok(out - entropy_at(spectrum, n))
}
