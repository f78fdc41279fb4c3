use crate::error::{Error, Result};

const DEFAULT_GRID: usize = 128;
// 1/φ
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Locate the first local maximum of `f` on `[lo, hi]`.
///
/// A uniform scan of 128 samples selects the earliest sample that is not
/// below its left neighbour and strictly above its right neighbour (or the
/// larger endpoint if `f` is monotone on the scan). Golden-section search on
/// the two neighbouring cells brings the bracket down to `tol`, and a final
/// three-point parabolic step removes the flat-top ambiguity golden section
/// has near a smooth maximum.
pub fn maximize_scalar<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> f64,
{
    maximize_scalar_with(f, lo, hi, tol, DEFAULT_GRID)
}

/// [`maximize_scalar`] with an explicit number of scan samples (>= 3).
pub fn maximize_scalar_with<F>(mut f: F, lo: f64, hi: f64, tol: f64, n_grid: usize) -> Result<Maximum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("invalid bracket ({lo}, {hi})")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    if n_grid < 3 {
        return Err(Error::domain("scan needs at least 3 samples"));
    }

    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { x })
        }
    };

    let step = (hi - lo) / (n_grid - 1) as f64;
    let xs: Vec<f64> = (0..n_grid)
        .map(|i| if i + 1 == n_grid { hi } else { lo + step * i as f64 })
        .collect();
    let mut ys = Vec::with_capacity(n_grid);
    for &x in &xs {
        ys.push(eval(x)?);
    }

    let interior = (1..n_grid - 1).find(|&i| ys[i] >= ys[i - 1] && ys[i] > ys[i + 1]);
    let Some(i) = interior else {
        let (x, y) = if ys[n_grid - 1] >= ys[0] {
            (hi, ys[n_grid - 1])
        } else {
            (lo, ys[0])
        };
        return Ok(Maximum { arg: x, value: y });
    };

    // Golden section on [x_{i-1}, x_{i+1}].
    let (mut a, mut b) = (xs[i - 1], xs[i + 1]);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    let mut best = if fc >= fd { Maximum { arg: c, value: fc } } else { Maximum { arg: d, value: fd } };

    // Parabolic polish over a stencil wide enough for the function values to
    // differ by many ulps.
    let h = (1e-5 * best.arg.abs().max(step)).max(tol);
    if best.arg - h >= lo && best.arg + h <= hi {
        let fm = eval(best.arg - h)?;
        let f0 = eval(best.arg)?;
        let fp = eval(best.arg + h)?;
        let curv = fp - 2.0 * f0 + fm;
        if curv < 0.0 {
            let shift = -0.5 * h * (fp - fm) / curv;
            if shift.abs() <= h {
                let x = best.arg + shift;
                let v = eval(x)?;
                if v >= f0 - 8.0 * f64::EPSILON * f0.abs() {
                    best = Maximum { arg: x, value: v.max(f0) };
                }
            }
        }
    }
    Ok(best)
}
