use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;

const MAX_ITER: usize = 10_000;
const FPMIN: f64 = 1e-300;
const SERIES_LIMIT: f64 = 1.5;

/// Fresnel integrals `(C(z), S(z))` with `C(z) = ∫₀^z cos(πu²/2) du` and
/// `S(z) = ∫₀^z sin(πu²/2) du`.
///
/// Power series for `|z| <= 1.5`, a complex continued fraction (modified
/// Lentz) for the complementary error function above that.
pub fn fresnel(z: f64) -> (f64, f64) {
    if z.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    let ax = z.abs();
    let (c, s) = if ax.is_infinite() {
        (0.5, 0.5)
    } else if ax < FPMIN.sqrt() {
        (ax, 0.0)
    } else if ax <= SERIES_LIMIT {
        series(ax)
    } else {
        continued_fraction(ax)
    };
    if z < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

fn series(ax: f64) -> (f64, f64) {
    // Alternating sums in t = π x²/2; odd powers of t feed S, even feed C.
    let fact = FRAC_PI_2 * ax * ax;
    let mut sum = 0.0;
    let mut sums = 0.0;
    let mut sumc = ax;
    let mut sign = 1.0;
    let mut term = ax;
    let mut odd = true;
    let mut n = 3.0;
    for k in 1..MAX_ITER {
        term *= fact / k as f64;
        sum += sign * term / n;
        let test = sum.abs() * f64::EPSILON * 0.5;
        if odd {
            sign = -sign;
            sums = sum;
            sum = sumc;
        } else {
            sumc = sum;
            sum = sums;
        }
        if term < test {
            break;
        }
        odd = !odd;
        n += 2.0;
    }
    (sumc, sums)
}

fn continued_fraction(ax: f64) -> (f64, f64) {
    let pix2 = PI * ax * ax;
    let mut b = C64::new(1.0, -pix2);
    let mut cc = C64::new(1.0 / FPMIN, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = (d * a + b).inv();
        cc = b + cc.inv() * a;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() <= f64::EPSILON {
            break;
        }
    }
    h *= C64::new(ax, -ax);
    // Reduce the phase π x²/2 using x² mod 4 to keep the argument small.
    let phase = FRAC_PI_2 * (ax * ax).rem_euclid(4.0);
    let cs = C64::new(0.5, 0.5) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, phase) * h);
    (cs.re, cs.im)
}
