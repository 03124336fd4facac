//! Solves of the primal Vandermonde system `sum_d z_b^(d-1) c_d = v_b`.
//!
//! The main path is the Bjorck-Pereyra scheme (Newton divided differences
//! followed by conversion to the monomial basis), `O(N^2)` per right-hand
//! side, carried out in double-double arithmetic so that the
//! ill-conditioning of monomial bases on `[0, 1]` costs digits we can spare.
//! A residual probe guards each solve; when it fails the system falls back
//! to a partially pivoted LU factorization built once on demand.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::double_double::DoubleDouble;
use crate::error::{Error, Result};

/// Minimal admissible `min |z_k - z_j| / max(z_max, 1e-30)`.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Relative residual above which the dense fallback is used.
const RESIDUAL_PROBE: f64 = 1e-8;

type Lu = nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>;

#[derive(Debug)]
pub struct VandermondeSystem {
    nodes: Vec<f64>,
    lu: OnceLock<Lu>,
}

impl Clone for VandermondeSystem {
    fn clone(&self) -> Self {
        Self {
            nodes: self.nodes.clone(),
            lu: OnceLock::new(),
        }
    }
}

/// Smallest pairwise node gap relative to the largest node magnitude.
pub fn min_relative_gap(nodes: &[f64]) -> f64 {
    if nodes.len() < 2 {
        return f64::INFINITY;
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let scale = sorted.iter().fold(0.0f64, |m, z| m.max(z.abs())).max(1e-30);
    sorted
        .windows(2)
        .map(|w| (w[1] - w[0]) / scale)
        .fold(f64::INFINITY, f64::min)
}

impl VandermondeSystem {
    pub fn new(nodes: impl Into<Vec<f64>>) -> Result<Self> {
        let nodes = nodes.into();
        if nodes.is_empty() {
            return Err(Error::Domain(
                "Vandermonde system needs at least one node".into(),
            ));
        }
        if nodes.iter().any(|z| !z.is_finite()) {
            return Err(Error::Domain("Vandermonde nodes must be finite".into()));
        }
        let gap = min_relative_gap(&nodes);
        if gap < DEGENERACY_THRESHOLD {
            return Err(Error::Degenerate {
                min_gap: gap,
                threshold: DEGENERACY_THRESHOLD,
            });
        }
        Ok(Self {
            nodes,
            lu: OnceLock::new(),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Returns `c` with `V c = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.nodes.len();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rhs.len(),
            });
        }
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let extended: Vec<DoubleDouble> = rhs.iter().map(|&v| v.into()).collect();
        Ok(self.solve_checked(&extended, scale))
    }

    /// Solve with a right-hand side carried in double-double. Nearly
    /// coincident nodes amplify the rounding of the data, so callers that can
    /// evaluate the data to extra precision should do so.
    pub(crate) fn solve_extended(&self, rhs: &[DoubleDouble]) -> Result<Vec<f64>> {
        let n = self.nodes.len();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rhs.len(),
            });
        }
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs().to_f64()));
        if scale == 0.0 {
            return Ok(vec![0.0; n]);
        }
        Ok(self.solve_checked(rhs, scale))
    }

    fn solve_checked(&self, rhs: &[DoubleDouble], scale: f64) -> Vec<f64> {
        let c = self.bjorck_pereyra(rhs);
        if c.iter().all(|v| v.is_finite()) && self.residual_dd(&c, rhs, scale) <= RESIDUAL_PROBE {
            return c.iter().map(|v| v.to_f64()).collect();
        }
        let rounded: Vec<f64> = rhs.iter().map(|v| v.to_f64()).collect();
        self.dense_solve(&rounded)
    }

    fn residual_dd(&self, c: &[DoubleDouble], rhs: &[DoubleDouble], scale: f64) -> f64 {
        self.nodes
            .iter()
            .zip(rhs)
            .map(|(&z, &v)| {
                let z = DoubleDouble::from(z);
                let p = c
                    .iter()
                    .rev()
                    .fold(DoubleDouble::ZERO, |acc, &cd| acc * z + cd);
                (p - v).abs().to_f64()
            })
            .fold(0.0f64, f64::max)
            / scale
    }

    /// `||V c - rhs||_inf / ||rhs||_inf`.
    pub fn relative_residual(&self, c: &[f64], rhs: &[f64]) -> f64 {
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = self
            .nodes
            .iter()
            .zip(rhs)
            .map(|(&z, &v)| {
                let p = c.iter().rev().fold(0.0, |acc, &cd| acc * z + cd);
                (p - v).abs()
            })
            .fold(0.0f64, f64::max);
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    fn bjorck_pereyra(&self, rhs: &[DoubleDouble]) -> Vec<DoubleDouble> {
        let z: Vec<DoubleDouble> = self.nodes.iter().map(|&v| v.into()).collect();
        let n = z.len();
        let mut c = rhs.to_vec();
        for k in 0..n.saturating_sub(1) {
            for i in (k + 1..n).rev() {
                c[i] = (c[i] - c[i - 1]) / (z[i] - z[i - k - 1]);
            }
        }
        for k in (0..n.saturating_sub(1)).rev() {
            for i in k..n - 1 {
                c[i] = c[i] - z[k] * c[i + 1];
            }
        }
        c
    }

    fn dense_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let lu = self.lu.get_or_init(|| {
            let n = self.nodes.len();
            DMatrix::from_fn(n, n, |b, d| self.nodes[b].powi(d as i32)).lu()
        });
        let b = DVector::from_column_slice(rhs);
        match lu.solve(&b) {
            Some(x) => x.iter().copied().collect(),
            // Not reachable for nodes that passed the gap check; keep the
            // error visible through the residual instead of panicking.
            None => vec![f64::NAN; rhs.len()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_systems() {
        let v = VandermondeSystem::new(vec![1.0, 2.0]).unwrap();
        let c = v.solve(&[1.0, 1.0]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15 && c[1].abs() < 1e-15);
        let v = VandermondeSystem::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(v.solve(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        let v = VandermondeSystem::new(vec![0.04, 0.36]).unwrap();
        let rhs = [0.3, -1.7];
        let c = v.solve(&rhs).unwrap();
        assert!(v.relative_residual(&c, &rhs) <= 1e-10);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let v = VandermondeSystem::new(vec![0.1, 0.2, 0.5]).unwrap();
        assert_eq!(v.solve(&[0.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn rejects_degenerate_and_mismatched() {
        assert!(matches!(
            VandermondeSystem::new(vec![0.25, 0.25 * (1.0 + 1e-10)]),
            Err(Error::Degenerate { .. })
        ));
        assert!(matches!(
            VandermondeSystem::new(vec![0.0, 0.0]),
            Err(Error::Degenerate { .. })
        ));
        let v = VandermondeSystem::new(vec![0.1, 0.2]).unwrap();
        assert!(matches!(
            v.solve(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn chebyshev_unit(n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| 0.5 * (1.0 - (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos()))
            .collect()
    }

    #[test]
    fn reproduces_monomial_right_hand_sides() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 8, 15, 30] {
            let nodes = chebyshev_unit(n);
            let sys = VandermondeSystem::new(nodes.clone()).unwrap();
            for _ in 0..5 {
                let d = rng.random_range(0..n);
                let rhs: Vec<f64> = nodes.iter().map(|z| z.powi(d as i32)).collect();
                let c = sys.solve(&rhs).unwrap();
                let err = sys.relative_residual(&c, &rhs);
                assert!(err <= 1e-9, "n = {n}, d = {d}: {err:e}");
            }
        }
    }

    #[test]
    fn recovers_monomial_coefficients_when_well_conditioned() {
        for n in [2usize, 4, 8] {
            let nodes = chebyshev_unit(n);
            let sys = VandermondeSystem::new(nodes.clone()).unwrap();
            for d in 0..n {
                let rhs: Vec<f64> = nodes.iter().map(|z| z.powi(d as i32)).collect();
                let c = sys.solve(&rhs).unwrap();
                for (i, v) in c.iter().enumerate() {
                    let want = if i == d { 1.0 } else { 0.0 };
                    assert!((v - want).abs() <= 1e-9, "n = {n}, d = {d}, i = {i}: {v}");
                }
            }
        }
    }

    #[test]
    fn residual_small_on_random_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nodes: Vec<f64> = (1..=6).map(|k| (k as f64 / 6.0).powi(2)).collect();
        let sys = VandermondeSystem::new(nodes).unwrap();
        for _ in 0..20 {
            let rhs: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = sys.solve(&rhs).unwrap();
            assert!(sys.relative_residual(&c, &rhs) <= 1e-8);
        }
    }

    #[test]
    fn dense_fallback_agrees() {
        let nodes = vec![0.01, 0.09, 0.25, 0.49, 0.81];
        let sys = VandermondeSystem::new(nodes).unwrap();
        let rhs = [0.2, -0.4, 1.1, 0.0, 0.7];
        let a = sys.bjorck_pereyra(&rhs.map(DoubleDouble::from));
        let b = sys.dense_solve(&rhs);
        for (x, y) in a.iter().map(|v| v.to_f64()).zip(&b) {
            assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }
}
