//! Leading order at maximal degeneracy `y_1 = ... = y_N = y`.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::state::mode_entropy;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Effective fraction `f_y = (1 - sqrt(1 - 4 f (1 - f) y^2)) / 2`, with
/// `f_1 = f` and `f_0 = 0` for `f <= 1/2`.
pub fn f_y_map(f: f64, y: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&f) {
        return Err(Error::Domain(format!("fraction {f} outside [0, 1/2]")));
    }
    check_unit("y", y)?;
    if y == 1.0 {
        return Ok(f);
    }
    let arg = 4.0 * f * (1.0 - f) * y * y;
    // 1 - sqrt(1 - a) written without cancellation.
    Ok(0.5 * arg / (1.0 + (1.0 - arg).sqrt()))
}

/// `(1 + y)/2 log(1 - (p - q)^2) + (1 - y)/2 log(1 - (p + q)^2)` with
/// `p = sqrt(f (1 - f_y))`, `q = sqrt(f_y (1 - f))`. Terms with a vanishing
/// prefactor are dropped so that `y = 1`, `f = 1/2` stays finite.
fn bracket(f: f64, fy: f64, y: f64) -> f64 {
    let p = (f * (1.0 - fy)).sqrt();
    let q = (fy * (1.0 - f)).sqrt();
    let mut out = 0.5 * (1.0 + y) * (-(p - q) * (p - q)).ln_1p();
    if y < 1.0 {
        out += 0.5 * (1.0 - y) * (-(p + q) * (p + q)).ln_1p();
    }
    out
}

fn check_fraction(f: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Domain(format!("fraction {f} outside (0, 1)")));
    }
    Ok(())
}

/// `lim <S_A> / N` at maximal degeneracy. For `f > 1/2` the larger block
/// carries `(2f - 1) N` extra values at `y`.
pub fn entropy_max_degenerate_limit(f: f64, y: f64) -> Result<f64> {
    check_fraction(f)?;
    check_unit("y", y)?;
    if f > 0.5 {
        return Ok(entropy_max_degenerate_limit(1.0 - f, y)? + (2.0 * f - 1.0) * mode_entropy(y));
    }
    let fy = f_y_map(f, y)?;
    let mut out =
        f * LN_2 - f - (1.0 - f) * (-f).ln_1p() + (f - fy) + 0.5 * ((1.0 - f) / (1.0 - fy)).ln();
    if f < 0.5 {
        out += 0.5 * (1.0 - 2.0 * f) * bracket(f, fy, y);
    }
    Ok(out)
}

/// `lim <I_AB> / N` at maximal degeneracy; symmetric under `f <-> 1 - f`.
pub fn mutual_info_max_degenerate_limit(f: f64, y: f64) -> Result<f64> {
    check_fraction(f)?;
    check_unit("y", y)?;
    let f = if f > 0.5 { 1.0 - f } else { f };
    let fy = f_y_map(f, y)?;
    let mut out = -2.0 * fy - 2.0 * (1.0 - f) * (-f).ln_1p() + ((1.0 - f) / (1.0 - fy)).ln();
    if f < 0.5 {
        out += (1.0 - 2.0 * f) * bracket(f, fy, y);
    }
    let one_minus = if y < 1.0 {
        (1.0 - y) * (-y).ln_1p()
    } else {
        0.0
    };
    out += f * ((1.0 + y) * y.ln_1p() + one_minus);
    Ok(out)
}

/// Limiting density of the continuous part of the smaller block's spectrum,
/// normalized to one on `[0, a y)`, `a = sqrt(4 f (1 - f))`.
pub fn macroscopic_density(f: f64, y: f64, x: f64) -> Result<f64> {
    if !(f > 0.0 && f <= 0.5) {
        return Err(Error::Domain(format!("fraction {f} outside (0, 1/2]")));
    }
    check_unit("y", y)?;
    let a2 = 4.0 * f * (1.0 - f);
    let a = a2.sqrt();
    if y == 0.0 || x < 0.0 || x >= a * y {
        return Ok(0.0);
    }
    let r2 = (x / y) * (x / y);
    // 1 - sqrt(1 - a^2) = 2f for f <= 1/2.
    Ok(2.0 / (y * PI * 2.0 * f) * (a2 - r2).sqrt() / (1.0 - r2))
}
