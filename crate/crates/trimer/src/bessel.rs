//! Integer-order Bessel functions of the first kind and their positive zeros.
//!
//! Evaluation uses the ascending power series for small arguments and
//! Miller's normalized downward recurrence otherwise, so the crate carries
//! no special-function dependency. Zeros are located by a unit-step scan
//! for a sign change (consecutive zeros of J_n are more than pi apart, so a
//! unit step cannot skip one), refined by bisection and polished with Newton
//! steps using J_n' = (J_{n-1} - J_{n+1})/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported |order| for [`bessel_j`].
pub const MAX_ORDER: i32 = 64;
/// Largest supported |argument| for [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 1e4;
/// Largest order and zero index served by [`bessel_zero`].
pub const MAX_ZERO_INDEX: usize = 16;

/// Switch point between the ascending series and Miller's recurrence.
const SERIES_CUTOFF: f64 = 9.0;

/// The s-th positive zero of J_order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselZero {
    pub order: u32,
    /// 1-based index among the positive zeros.
    pub index: usize,
    pub value: f64,
}

/// J_n(x) for integer n, to at least 1e-12 absolute accuracy.
///
/// Negative orders and arguments reduce via J_{-n}(x) = (-1)^n J_n(x) and
/// J_n(-x) = (-1)^n J_n(x).
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    if n.abs() > MAX_ORDER {
        return Err(Error::BesselOrderOutOfRange { n, max: MAX_ORDER });
    }
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::BesselArgumentOutOfRange {
            x,
            max: MAX_ARGUMENT,
        });
    }
    let mut sign = 1.0;
    let mut n = n;
    let mut x = x;
    if n < 0 {
        n = -n;
        if n % 2 == 1 {
            sign = -sign;
        }
    }
    if x < 0.0 {
        x = -x;
        if n % 2 == 1 {
            sign = -sign;
        }
    }
    let value = if x == 0.0 {
        if n == 0 {
            1.0
        } else {
            0.0
        }
    } else if x <= SERIES_CUTOFF {
        series(n as u32, x)
    } else {
        miller(n as u32, x)
    };
    Ok(sign * value)
}

/// Ascending series sum_k (-1)^k (x/2)^{n+2k} / (k! (n+k)!).
fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / f64::from(k);
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..200 {
        term *= -q / (f64::from(k) * f64::from(n + k));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// Miller's downward recurrence normalized by J_0 + 2 sum_k J_{2k} = 1.
fn miller(n: u32, x: f64) -> f64 {
    let start = (x + 20.0 * x.cbrt() + 30.0).ceil() as usize;
    let mut m = start.max(n as usize + 20);
    if m % 2 == 1 {
        m += 1;
    }
    let mut vals = vec![0.0f64; m + 2];
    vals[m] = 1e-30;
    for k in (1..=m).rev() {
        vals[k - 1] = (2.0 * k as f64 / x) * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = vals[0];
    for k in (2..=m).step_by(2) {
        norm += 2.0 * vals[k];
    }
    vals[n as usize] / norm
}

/// First derivative J_n'(x) via the recurrence J_n' = (J_{n-1} - J_{n+1})/2.
pub fn bessel_j_derivative(n: i32, x: f64) -> Result<f64> {
    if n == 0 {
        return Ok(-bessel_j(1, x)?);
    }
    Ok(0.5 * (bessel_j(n - 1, x)? - bessel_j(n + 1, x)?))
}

/// The s-th positive zero of J_n, accurate to better than 1e-10.
pub fn bessel_zero(n: u32, s: usize) -> Result<BesselZero> {
    if n as usize > MAX_ZERO_INDEX || s == 0 || s > MAX_ZERO_INDEX {
        return Err(Error::BesselZeroOutOfRange { n: n as i32, s });
    }
    // J_n > 0 on (0, j_{n,1}), and consecutive zeros are > pi apart, so a
    // unit-step scan brackets each zero exactly once.
    let mut a = if n == 0 { 0.5 } else { f64::from(n) };
    let mut fa = bessel_j(n as i32, a)?;
    let mut found = 0;
    let mut b;
    loop {
        b = a + 1.0;
        if b > 200.0 {
            return Err(Error::BesselZeroOutOfRange { n: n as i32, s });
        }
        let fb = bessel_j(n as i32, b)?;
        if fa == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == s {
                break;
            }
        }
        a = b;
        fa = fb;
    }
    // bisection to ~1e-12, then Newton polish
    let (mut lo, mut hi) = (a, b);
    let mut flo = fa;
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        let fmid = bessel_j(n as i32, mid)?;
        if fmid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if flo.signum() == fmid.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..4 {
        let f = bessel_j(n as i32, z)?;
        let d = bessel_j_derivative(n as i32, z)?;
        if d == 0.0 {
            break;
        }
        let step = f / d;
        z -= step;
        if step.abs() < 1e-15 * z.abs() {
            break;
        }
    }
    Ok(BesselZero {
        order: n,
        index: s,
        value: z,
    })
}
