use std::f64::consts::E;

use crate::error::{Error, Result};

/// Lower real branch `W₋₁(x)` of the Lambert W function: the solution
/// `w <= -1` of `w e^w = x` for `-1/e <= x < 0`.
///
/// Bracketed bisection followed by a guarded Halley polish. The branch point
/// `x = -1/e` (to within a few ulps) returns exactly `-1`.
pub fn lambert_w_branch_minus1(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if !x.is_finite() || x >= 0.0 || x < branch - 4.0 * f64::EPSILON * branch.abs() {
        return Err(Error::domain(format!("W₋₁(x) requires -1/e <= x < 0, got {x}")));
    }
    if (x - branch).abs() <= 4.0 * f64::EPSILON * branch.abs() {
        return Ok(-1.0);
    }

    let f = |w: f64| w * w.exp() - x;
    // w e^w decreases from 0⁻ (w → -∞) to -1/e (w = -1).
    let mut hi = -1.0;
    let mut lo = -2.0;
    while f(lo) < 0.0 {
        lo *= 2.0;
        if lo < -1e4 {
            return Err(Error::domain(format!("W₋₁({x}) below representable range")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = if f(lo).abs() < f(hi).abs() { lo } else { hi };

    for _ in 0..4 {
        let ew = w.exp();
        let r = w * ew - x;
        if r == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * r / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let next = w - r / denom;
        if next.is_finite() && next <= -1.0 && f(next).abs() < r.abs() {
            w = next;
        } else {
            break;
        }
    }
    Ok(w)
}
