//! Exact finite-`N` averages over Haar-random projections.
//!
//! The generic path integrates `(log 2 - s) R_1` against the determinantal
//! kernel of [`KernelEvaluator`]. Closed forms cover `N = 2`
//! ([`two_mode_entropy`]) and maximally degenerate spectra
//! ([`max_degenerate_breakdown`]).

mod evaluator;
mod jacobi;
mod two_mode;

pub use evaluator::{integrated_deficit_series, jpdf, jpdf_corank2_step, KernelEvaluator};
pub use jacobi::{
    jacobi_density, max_degenerate_breakdown, max_degenerate_breakdown_with, DensityValue,
    JacobiKernel,
};
pub use two_mode::{g_hat, g_hat_derivative, two_mode_entropy};

use crate::error::{Error, Result};
use crate::numerics::{min_relative_gap, QuadratureSpec, DEGENERACY_THRESHOLD};
use crate::state::{total_deficit, EntropyBreakdown, Partition, Spectrum};

/// Spectra whose relative spread `(y_max - y_min) / y_max` is at most this
/// are treated as maximally degenerate at their mean value. The averages
/// are symmetric functions of the spectrum, so the error is second order in
/// the spread.
pub const NEAR_DEGENERATE_SPREAD: f64 = 1e-4;

/// Relative size of the splitting applied to clustered singular values.
pub const CLUSTER_SPLITTING: f64 = 1e-6;

/// Evaluation path chosen by [`exact_breakdown_auto`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    Kernel,
    /// Jacobi kernel at the mean singular value.
    MaximalDegeneracy {
        y0: f64,
        spread: f64,
    },
    /// Clusters split by `epsilon` and `epsilon / 2`, then Richardson extrapolated.
    ClusterSplitting {
        epsilon: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactResult {
    pub breakdown: EntropyBreakdown,
    pub route: Route,
}

/// Exact average entropies and mutual information by kernel quadrature.
///
/// Fails with [`Error::Degenerate`] if two `y_j^2` are too close; see
/// [`exact_breakdown_auto`] for automatic rerouting.
pub fn exact_breakdown(spectrum: &Spectrum, partition: Partition) -> Result<EntropyBreakdown> {
    exact_breakdown_with(spectrum, partition, &QuadratureSpec::default())
}

pub fn exact_breakdown_with(
    spectrum: &Spectrum,
    partition: Partition,
    spec: &QuadratureSpec,
) -> Result<EntropyBreakdown> {
    check_sizes(spectrum, partition)?;
    let d_a = KernelEvaluator::new(spectrum, partition.n_a())?.average_deficit_with(spec)?;
    let d_b = KernelEvaluator::new(spectrum, partition.n_b())?.average_deficit_with(spec)?;
    Ok(EntropyBreakdown::from_deficits(
        partition,
        d_a,
        d_b,
        total_deficit(spectrum),
    ))
}

fn check_sizes(spectrum: &Spectrum, partition: Partition) -> Result<()> {
    if spectrum.n() != partition.n() {
        return Err(Error::DimensionMismatch {
            expected: partition.n(),
            found: spectrum.n(),
        });
    }
    Ok(())
}

/// Relative spread `(y_max - y_min) / y_max` (zero for the null spectrum).
pub fn relative_spread(spectrum: &Spectrum) -> f64 {
    let top = spectrum.max();
    if top == 0.0 {
        0.0
    } else {
        (top - spectrum.min()) / top
    }
}

/// Like [`exact_breakdown_with`] but reroutes degenerate spectra: (near-)
/// constant spectra go through the Jacobi kernel, other clusters are split
/// and extrapolated.
pub fn exact_breakdown_auto(
    spectrum: &Spectrum,
    partition: Partition,
    spec: &QuadratureSpec,
) -> Result<ExactResult> {
    check_sizes(spectrum, partition)?;
    let spread = relative_spread(spectrum);
    if spread <= NEAR_DEGENERATE_SPREAD {
        let values = spectrum.values();
        let y0 = values.iter().sum::<f64>() / values.len() as f64;
        let breakdown =
            max_degenerate_breakdown_with(partition.n(), partition.n_a(), y0.min(1.0), spec)?;
        return Ok(ExactResult {
            breakdown,
            route: Route::MaximalDegeneracy { y0, spread },
        });
    }
    let squares: Vec<f64> = spectrum.values().iter().map(|y| y * y).collect();
    if min_relative_gap(&squares) >= DEGENERACY_THRESHOLD {
        return Ok(ExactResult {
            breakdown: exact_breakdown_with(spectrum, partition, spec)?,
            route: Route::Kernel,
        });
    }
    let eps = CLUSTER_SPLITTING;
    let coarse = exact_breakdown_with(&split_clusters(spectrum, eps)?, partition, spec)?;
    let fine = exact_breakdown_with(&split_clusters(spectrum, 0.5 * eps)?, partition, spec)?;
    let extrapolate = |c: f64, f: f64| 2.0 * f - c;
    // The total entropy is known exactly for the original spectrum.
    let s_total = crate::state::total_entropy(spectrum);
    let breakdown = EntropyBreakdown::new(
        extrapolate(coarse.s_a(), fine.s_a()),
        extrapolate(coarse.s_b(), fine.s_b()),
        s_total,
    );
    Ok(ExactResult {
        breakdown,
        route: Route::ClusterSplitting { epsilon: eps },
    })
}

/// Splits every cluster of (relatively) coincident `y_j^2` into members
/// `epsilon * z_max` apart, centered on the cluster unless that would leave
/// `[0, 1]`.
pub fn split_clusters(spectrum: &Spectrum, epsilon: f64) -> Result<Spectrum> {
    let z: Vec<f64> = spectrum.values().iter().map(|y| y * y).collect();
    let scale = z.last().copied().unwrap_or(0.0).max(1e-30);
    let step = epsilon * scale;
    let mut out = z.clone();
    let mut start = 0;
    while start < z.len() {
        let mut end = start + 1;
        while end < z.len() && z[end] - z[end - 1] < step {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let anchor = z[start..end].iter().sum::<f64>() / size as f64;
            let half = 0.5 * (size - 1) as f64 * step;
            let base = if anchor - half < 0.0 {
                anchor
            } else if anchor + half > 1.0 {
                anchor - 2.0 * half
            } else {
                anchor - half
            };
            for (i, slot) in out[start..end].iter_mut().enumerate() {
                *slot = (base + i as f64 * step).clamp(0.0, 1.0);
            }
        }
        start = end;
    }
    Spectrum::new(out.into_iter().map(f64::sqrt).collect::<Vec<_>>())
}
