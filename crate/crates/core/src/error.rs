use thiserror::Error;

/// Errors raised by the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "degenerate nodes: min relative gap {min_gap:.3e} below threshold {threshold:.1e} \
         (reroute through the maximal-degeneracy or perturbation path)"
    )]
    Degenerate { min_gap: f64, threshold: f64 },

    #[error("quadrature did not converge after {panels} panels: estimate {estimate}, error bound {error_bound:.3e}")]
    NonConvergence {
        estimate: f64,
        error_bound: f64,
        panels: usize,
    },

    #[error("root not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("series did not converge after {terms} terms (partial sum {partial}, tail bound {tail:.3e})")]
    SeriesNonConvergence {
        partial: f64,
        tail: f64,
        terms: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sampled frame is rank deficient (orthonormality defect {defect:.3e})")]
    RankDeficient { defect: f64 },

    #[error("singular values failed to pair at index {index}: {first} vs {second}")]
    Pairing {
        index: usize,
        first: f64,
        second: f64,
    },

    #[error("guard rejected input: {0}")]
    Guard(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
