//! Average entanglement entropy and mutual information of random fermionic
//! Gaussian states with a fixed complex-structure spectrum.
//!
//! Three engines cross-check each other: Monte-Carlo sampling over Haar
//! random orthogonal conjugations ([`sampler`]), exact finite-`N` formulas
//! from the determinantal structure of the projected spectrum ([`finite`]),
//! and large-`N` expansions ([`asymptotics`]).

pub mod asymptotics;
pub mod error;
pub mod finite;
pub mod numerics;
pub mod sampler;
pub mod state;

pub use error::{Error, Result};
pub use state::{
    entropy_deficit, entropy_kernel, spectrum_from_bogoliubov, total_deficit, total_entropy,
    EntropyBreakdown, Partition, Spectrum,
};
