//! Summation of series with caller-supplied tail bounds.

use crate::error::{Error, Result};

const MAX_TERMS: usize = 1_000_000;

/// `sum_{k >= 0} term(k)`, stopping at the first `k` where
/// `tail_bound(k + 1)` (a bound on the remaining sum) drops below `tol`.
pub fn sum_series<T, B>(term: T, tail_bound: B, tol: f64) -> Result<f64>
where
    T: Fn(usize) -> f64,
    B: Fn(usize) -> f64,
{
    let mut sum = 0.0;
    let mut tail = f64::INFINITY;
    for k in 0..MAX_TERMS {
        sum += term(k);
        tail = tail_bound(k + 1);
        if tail.abs() <= tol {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNonConvergence {
        partial: sum,
        tail,
        terms: MAX_TERMS,
    })
}
