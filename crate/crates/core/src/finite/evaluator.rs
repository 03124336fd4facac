//! Weights, kernel and level density of the projected singular values for a
//! spectrum with pairwise distinct `y_j^2`.
//!
//! Every determinant ratio with one replaced column is a Cramer-rule
//! component of a single Vandermonde solve on the nodes `y_j^2`, with the
//! right-hand side `v_b(x) = (y_b - x)^p Θ(y_b - x)`, `p = 2N - 2m - 1`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::double_double::DoubleDouble;
use crate::numerics::{
    integrate, log_factorial_ratio, sum_series, QuadratureSpec, VandermondeSystem,
};
use crate::state::{entropy_deficit, Spectrum};

/// Kernel of the determinantal process formed by the `m` singular values of
/// a random corank-`2(N - m)` projection.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    spectrum: Spectrum,
    m: usize,
    system: VandermondeSystem,
    /// `log a_j`, `a_j = (2N-2m+2j)! / ((2j)! (2N-2m-1)!)`.
    log_coeffs: Vec<f64>,
    power: i32,
}

impl KernelEvaluator {
    pub fn new(spectrum: &Spectrum, m: usize) -> Result<Self> {
        let n = spectrum.n();
        if m == 0 || m >= n {
            return Err(Error::Domain(format!(
                "retained modes must satisfy 1 <= m < N, got m = {m}, N = {n}"
            )));
        }
        let nodes: Vec<f64> = spectrum.values().iter().map(|y| y * y).collect();
        let system = VandermondeSystem::new(nodes)?;
        let l = (n - m) as u64;
        let log_coeffs = (0..m as u64)
            .map(|j| log_factorial_ratio(&[2 * l + 2 * j], &[2 * j, 2 * l - 1]))
            .collect();
        Ok(Self {
            spectrum: spectrum.clone(),
            m,
            system,
            log_coeffs,
            power: (2 * l - 1) as i32,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `log a_j` for `j = 0..m`.
    pub fn log_coefficients(&self) -> &[f64] {
        &self.log_coeffs
    }

    /// `(y_b - x)^p Θ(y_b - x)` in double-double, with `y_b` recomputed as
    /// the square root of the (rounded) node so data and nodes stay consistent.
    fn rhs(&self, x: f64) -> Vec<DoubleDouble> {
        let xd = DoubleDouble::from(x);
        self.spectrum
            .values()
            .iter()
            .zip(self.system.nodes())
            .map(|(&y, &z)| {
                if y > x {
                    (DoubleDouble::from(z).sqrt() - xd).powi(self.power as u32)
                } else {
                    DoubleDouble::ZERO
                }
            })
            .collect()
    }

    /// All `m` weights `w_1(x), ..., w_m(x)` from one solve.
    pub fn weights(&self, x: f64) -> Result<Vec<f64>> {
        if x >= self.spectrum.max() {
            return Ok(vec![0.0; self.m]);
        }
        let c = self.system.solve_extended(&self.rhs(x))?;
        Ok(c[self.n() - self.m..].to_vec())
    }

    /// Weight `w_c(x)`, `c` in `1..=m`.
    pub fn weight(&self, c: usize, x: f64) -> Result<f64> {
        if c == 0 || c > self.m {
            return Err(Error::Domain(format!(
                "weight index {c} outside 1..={}",
                self.m
            )));
        }
        Ok(self.weights(x)?[c - 1])
    }

    /// `a_j x^(2j)` for `j = 0..m`.
    fn polynomials(&self, x: f64) -> Vec<f64> {
        let lx = x.abs().ln();
        self.log_coeffs
            .iter()
            .enumerate()
            .map(|(j, la)| {
                if j == 0 {
                    la.exp()
                } else {
                    (la + 2.0 * j as f64 * lx).exp()
                }
            })
            .collect()
    }

    /// `K(x1, x2) = sum_j a_j x1^(2j) w_(j+1)(x2)`.
    pub fn kernel(&self, x1: f64, x2: f64) -> Result<f64> {
        let w = self.weights(x2)?;
        Ok(self
            .polynomials(x1)
            .iter()
            .zip(&w)
            .map(|(p, w)| p * w)
            .sum())
    }

    /// One-point function `R_1(x) = K(x, x)`; integrates to `m`.
    pub fn level_density(&self, x: f64) -> Result<f64> {
        self.kernel(x, x)
    }

    /// Two-point function `K(x1,x1) K(x2,x2) - K(x1,x2) K(x2,x1)`.
    pub fn two_point(&self, x1: f64, x2: f64) -> Result<f64> {
        Ok(self.kernel(x1, x1)? * self.kernel(x2, x2)?
            - self.kernel(x1, x2)? * self.kernel(x2, x1)?)
    }

    /// Quadrature settings with the kinks of `R_1` at every `y_k` as breakpoints.
    pub fn quadrature_spec(&self, base: &QuadratureSpec) -> QuadratureSpec {
        let mut breakpoints = base.breakpoints.clone();
        breakpoints.extend_from_slice(self.spectrum.values());
        QuadratureSpec {
            breakpoints,
            ..base.clone()
        }
    }

    /// `int_0^1 g(x) R_1(x) dx`.
    pub fn integrate_linear_statistic<G: Fn(f64) -> f64>(
        &self,
        g: G,
        spec: &QuadratureSpec,
    ) -> Result<f64> {
        let spec = self.quadrature_spec(spec);
        // Integrand errors are smuggled out through a cell because the
        // quadrature takes an infallible closure.
        let failure = std::cell::RefCell::new(None);
        let value = integrate(
            |x| match self.level_density(x) {
                Ok(r) => g(x) * r,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            0.0,
            self.spectrum.max(),
            &spec,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        value
    }

    /// Average entropy deficit `m log 2 - <S>` by quadrature of
    /// `(log 2 - s) R_1`.
    pub fn average_deficit_with(&self, spec: &QuadratureSpec) -> Result<f64> {
        self.integrate_linear_statistic(entropy_deficit, spec)
    }

    /// Average entropy `<sum_j s(x_j)>` of the `m` retained modes.
    pub fn average_entropy(&self) -> Result<f64> {
        self.average_entropy_with(&QuadratureSpec::default())
    }

    pub fn average_entropy_with(&self, spec: &QuadratureSpec) -> Result<f64> {
        Ok(self.m as f64 * LN_2 - self.average_deficit_with(spec)?)
    }

    /// Average entropy from the power series of the integrated deficit,
    /// without any quadrature: `m log 2 - sum_j [V^-1 r^(j)]_(N-m+j)` with
    /// `r_b = y_b^(2(N-m+j)) G_j(y_b)`.
    pub fn average_entropy_series(&self, tol: f64) -> Result<f64> {
        let n = self.n();
        let l = n - self.m;
        let mut deficit = 0.0;
        for j in 0..self.m {
            let shift = 2 * (l + j) as i32;
            let rhs = self
                .spectrum
                .values()
                .iter()
                .map(|&y| Ok(y.powi(shift) * integrated_deficit_series(l, j, y, tol)?))
                .collect::<Result<Vec<_>>>()?;
            deficit += self.system.solve(&rhs)?[l + j];
        }
        Ok(self.m as f64 * LN_2 - deficit)
    }
}

/// `a_j int_0^1 (log 2 - s(λ x)) x^(2j) (1 - x)^(2l-1) dx` summed as
/// `sum_(o>=1) [(2l+2j)! (2j+2o)! / ((2l+2j+2o)! (2j)!)] λ^(2o) / (2o(2o-1))`.
pub fn integrated_deficit_series(l: usize, j: usize, lambda: f64, tol: f64) -> Result<f64> {
    let lam2 = lambda * lambda;
    let (l64, j64) = (l as u64, j as u64);
    let head = log_factorial_ratio(&[2 * l64 + 2 * j64], &[2 * j64]);
    let term = |o: usize| -> f64 {
        let o64 = o as u64;
        let coef = head + log_factorial_ratio(&[2 * j64 + 2 * o64], &[2 * l64 + 2 * j64 + 2 * o64]);
        let of = o as f64;
        coef.exp() * lam2.powi(o as i32) / (2.0 * of * (2.0 * of - 1.0))
    };
    // Terms decay at least like o^-(2l+2) (times λ^(2o)).
    let q = 2.0 * l as f64 + 1.0;
    let tail = |k: usize| -> f64 {
        let o = k + 1;
        let t = term(o);
        let power_bound = t * (1.0 + o as f64 / (q - 1.0));
        if lam2 < 1.0 {
            power_bound.min(t / (1.0 - lam2))
        } else {
            power_bound
        }
    };
    sum_series(|k| term(k + 1), tail, tol)
}

/// Joint density of the `m = x.len()` projected singular values (symmetric,
/// normalized over `[0, 1]^m`).
pub fn jpdf(evaluator: &KernelEvaluator, x: &[f64]) -> Result<f64> {
    let m = evaluator.m();
    if x.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: x.len(),
        });
    }
    if x.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Domain("jpdf arguments must lie in [0, 1]".into()));
    }
    if x.iter().any(|&v| v >= evaluator.spectrum().max()) {
        return Ok(0.0);
    }
    let mut w = nalgebra::DMatrix::zeros(m, m);
    for (b, &xb) in x.iter().enumerate() {
        for (c, wc) in evaluator.weights(xb)?.into_iter().enumerate() {
            w[(b, c)] = wc;
        }
    }
    let mut vandermonde = 1.0;
    for b in 0..m {
        for c in b + 1..m {
            vandermonde *= x[c] * x[c] - x[b] * x[b];
        }
    }
    let log_prefactor: f64 =
        evaluator.log_coefficients().iter().sum::<f64>() - log_factorial_ratio(&[m as u64], &[]);
    Ok(log_prefactor.exp() * vandermonde * w.determinant())
}

/// Conditional density of the `L - 1` singular values after one corank-2
/// projection of a block with singular values `parent` (length `L`).
pub fn jpdf_corank2_step(parent: &[f64], child: &[f64]) -> Result<f64> {
    let l = parent.len();
    if l < 2 || child.len() + 1 != l {
        return Err(Error::DimensionMismatch {
            expected: l.saturating_sub(1),
            found: child.len(),
        });
    }
    let squares: Vec<f64> = parent.iter().map(|p| p * p).collect();
    let gap = crate::numerics::min_relative_gap(&squares);
    if gap < crate::numerics::DEGENERACY_THRESHOLD {
        return Err(Error::Degenerate {
            min_gap: gap,
            threshold: crate::numerics::DEGENERACY_THRESHOLD,
        });
    }
    let top = parent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if child.iter().any(|&c| c >= top) {
        return Ok(0.0);
    }
    let mut mat = nalgebra::DMatrix::zeros(l, l);
    for k in 0..l {
        mat[(0, k)] = 1.0;
        for (j, &c) in child.iter().enumerate() {
            mat[(j + 1, k)] = (parent[k] - c).max(0.0);
        }
    }
    let delta = |v: &[f64]| -> f64 {
        let mut d = 1.0;
        for b in 0..v.len() {
            for c in b + 1..v.len() {
                d *= v[c] * v[c] - v[b] * v[b];
            }
        }
        d
    };
    let lu64 = l as u64;
    let prefactor = log_factorial_ratio(&[2 * lu64 - 2], &[lu64 - 1]).exp();
    Ok(prefactor * delta(child) / delta(parent) * mat.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_mode_density_is_piecewise() {
        let ev = KernelEvaluator::new(&spectrum(&[0.2, 0.6]), 1).unwrap();
        assert!((ev.level_density(0.1).unwrap() - 2.5).abs() < 1e-12);
        assert!((ev.level_density(0.4).unwrap() - 1.25).abs() < 1e-12);
        assert_eq!(ev.level_density(0.7).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(KernelEvaluator::new(&spectrum(&[0.2, 0.6]), 2).is_err());
        assert!(KernelEvaluator::new(&spectrum(&[0.2, 0.6]), 0).is_err());
        assert!(matches!(
            KernelEvaluator::new(&spectrum(&[0.5, 0.5, 0.7]), 1),
            Err(Error::Degenerate { .. })
        ));
        let ev = KernelEvaluator::new(&spectrum(&[0.2, 0.6]), 1).unwrap();
        assert!(ev.weight(2, 0.1).is_err());
    }

    #[test]
    fn coefficients_in_log_domain() {
        // N = 5, m = 3: a_j = (4+2j)! / ((2j)! 3!).
        let ev = KernelEvaluator::new(&spectrum(&[0.1, 0.3, 0.5, 0.7, 0.9]), 3).unwrap();
        let expected = [4.0, 60.0, 280.0];
        for (la, e) in ev.log_coefficients().iter().zip(expected) {
            assert!((la.exp() - e).abs() < 1e-10 * e);
        }
    }

    #[test]
    fn series_matches_beta_integral() {
        let spec = QuadratureSpec::default().with_tolerance(1e-15, 1e-15);
        for &(l, j, lambda) in &[
            (2usize, 1usize, 0.9),
            (1, 0, 1.0),
            (3, 2, 0.5),
            (1, 1, 0.999),
        ] {
            let series = integrated_deficit_series(l, j, lambda, 1e-15).unwrap();
            let a = log_factorial_ratio(
                &[(2 * l + 2 * j) as u64],
                &[(2 * j) as u64, (2 * l - 1) as u64],
            )
            .exp();
            let direct = a * integrate(
                |x| {
                    entropy_deficit(lambda * x)
                        * x.powi(2 * j as i32)
                        * (1.0 - x).powi(2 * l as i32 - 1)
                },
                0.0,
                1.0,
                &spec,
            )
            .unwrap();
            assert!(
                (series - direct).abs() < 1e-11,
                "l={l} j={j}: {series} vs {direct}"
            );
        }
    }

    #[test]
    fn corank2_step_two_parents_is_piecewise_linear() {
        // L = 2: p(c | a, b) = 2 (b - c) / (b^2 - a^2) for a < c < b and
        // 2 (b - a) / (b^2 - a^2) below a.
        let (a, b) = (0.2, 0.6);
        for &c in &[0.05, 0.15, 0.3, 0.45, 0.59] {
            let got = jpdf_corank2_step(&[a, b], &[c]).unwrap();
            let want = if c < a { 2.0 * (b - a) } else { 2.0 * (b - c) } / (b * b - a * a);
            assert!((got - want).abs() < 1e-13, "c = {c}");
        }
        assert_eq!(jpdf_corank2_step(&[a, b], &[0.61]).unwrap(), 0.0);
    }
}
