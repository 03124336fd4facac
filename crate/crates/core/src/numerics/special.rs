//! Log-domain factorials.

/// Largest argument whose factorial is formed as an exact integer product.
const EXACT_LIMIT: u64 = 20;

/// `log n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= EXACT_LIMIT {
        return ((1..=n).product::<u64>() as f64).ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (std::f64::consts::TAU * x).ln() + series
}

/// `log(prod num_i! / prod den_j!)`.
pub fn log_factorial_ratio(num_args: &[u64], den_args: &[u64]) -> f64 {
    let sum = |args: &[u64]| -> f64 { args.iter().map(|&n| ln_factorial(n)).sum() };
    sum(num_args) - sum(den_args)
}
