//! Exponential integral `E1` and the volume-correction factor
//! `h(t) = 1 - t e^t E1(t)` of the infinite Mondrian forest kernel.

use crate::error::{Result, StitError};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E1(t) = integral_t^inf e^{-s}/s ds` for `t > 0`.
///
/// Power series for `t <= 1`, continued fraction above.
pub fn exp_integral_e1(t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_nan() {
        return Err(StitError::Domain(format!("E1 requires t > 0, got {t}")));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    if t <= 1.0 {
        Ok(e1_series(t))
    } else {
        Ok((-t).exp() / (t + 1.0 - cf_tail(t)))
    }
}

/// `h(t) = 1 - t e^t E1(t)` for `t >= 0`; `h(0) = 1`.
pub fn h_fn(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(StitError::Domain(format!("h requires t >= 0, got {t}")));
    }
    Ok(h_nonneg(t))
}

#[inline]
pub(crate) fn h_nonneg(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else if t.is_infinite() {
        0.0
    } else if t <= 1.0 {
        1.0 - t * t.exp() * e1_series(t)
    } else {
        // e^t E1(t) = 1 / (t + 1 - r), so 1 - t e^t E1(t) = (1 - r) / (t + 1 - r)
        // with no subtraction of nearly equal terms.
        let r = cf_tail(t);
        (1.0 - r) / (t + 1.0 - r)
    }
}

fn e1_series(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0; // t^k / k!
    for k in 1..60 {
        term *= t / k as f64;
        let add = term / k as f64;
        sum += if k % 2 == 1 { add } else { -add };
        if add < 1e-18 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - t.ln() + sum
}

/// Tail `r = 1/(t + 3 - 2^2/(t + 5 - 3^2/(t + 7 - ...)))` of the continued
/// fraction `e^t E1(t) = 1/(t + 1 - r)`, by the modified Lentz method.
fn cf_tail(t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..10_000u32 {
        let a = if k == 1 { 1.0 } else { -f64::from(k * k) };
        let b = t + f64::from(2 * k + 1);
        d = b + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = b + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}
