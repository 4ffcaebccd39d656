//! Standard Gaussian upper tail `P(Z > v)`.

use crate::error::{Error, Result};

/// Above this point the log tail is taken from the asymptotic series rather
/// than from `erfc`.
pub const ASYMPTOTIC_SWITCH: f64 = 8.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `P(Z > v)` for a standard normal `Z`.
pub fn gaussian_upper_tail(v: f64) -> f64 {
    0.5 * libm::erfc(v * core::f64::consts::FRAC_1_SQRT_2)
}

/// `ln P(Z > v)` for `v > 0`, finite for arbitrarily large `v`.
///
/// For `v > 8` uses `phi(v)/v * (1 - 1/v^2 + 3/v^4 - 15/v^6 + ...)` with six
/// correction terms; the first omitted term is below `2e-7` relative at the
/// switch point and shrinks like `v^-12` beyond it.
pub fn log_gaussian_upper_tail(v: f64) -> Result<f64> {
    if !(v > 0.0) || v.is_infinite() {
        return Err(Error::domain("v", v, "a finite value > 0"));
    }
    if v <= ASYMPTOTIC_SWITCH {
        return Ok(libm::log(gaussian_upper_tail(v)));
    }
    let inv2 = 1.0 / (v * v);
    // (2k-1)!! / v^(2k), alternating
    let mut term = 1.0;
    let mut series = 1.0;
    for k in 1..=6 {
        term *= -((2 * k - 1) as f64) * inv2;
        series += term;
    }
    Ok(-0.5 * v * v - libm::log(v) - LN_SQRT_2PI + libm::log(series))
}
