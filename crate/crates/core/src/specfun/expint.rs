use num_complex::Complex64 as C64;

use super::gamma::gamma;
use crate::error::{Error, Result};

const MAX_ITER: usize = 100_000;
const FPMIN: f64 = 1e-300;
// Below this |x| the power series is used; above it the continued fraction.
const SERIES_LIMIT: f64 = 1.5;

/// Generalised exponential integral on the imaginary axis,
/// `∫₁^∞ u^(-alpha) e^(i x u) du`, for `0 <= alpha < 1`.
///
/// The integral converges only conditionally; the value returned is the Abel
/// limit ε → 0⁺ of `∫₁^∞ u^(-alpha) e^((i x - ε) u) du`, which equals
/// `(-ix)^(alpha-1) Γ(1-alpha, -ix)` on the principal branch.
pub fn gen_exp_integral(alpha: f64, x: f64) -> Result<C64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !x.is_finite() || x.abs() >= 1e6 {
        return Err(Error::domain(format!("|x| must be finite and < 1e6, got {x}")));
    }
    if x == 0.0 {
        return Err(Error::Divergent(format!(
            "∫₁^∞ u^-{alpha} du diverges for alpha < 1"
        )));
    }
    if x < 0.0 {
        // E(-x) = conj(E(x)) holds exactly for the defining integral.
        return gen_exp_integral(alpha, -x).map(|v| v.conj());
    }
    if x <= SERIES_LIMIT {
        Ok(series(alpha, x))
    } else {
        continued_fraction(alpha, x)
    }
}

// Γ(a)(-ix)^(-a) - Σ (ix)^n / (n! (a + n)),  a = 1 - alpha.
fn series(alpha: f64, x: f64) -> C64 {
    let a = 1.0 - alpha;
    let lead = C64::from_polar(gamma(a) * x.powf(-a), 0.5 * std::f64::consts::PI * a);
    let ix = C64::new(0.0, x);
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term / a;
    for n in 1..MAX_ITER {
        term *= ix / n as f64;
        let contrib = term / (a + n as f64);
        sum += contrib;
        if contrib.norm() <= f64::EPSILON * 0.25 * sum.norm() {
            break;
        }
    }
    lead - sum
}

// Modified Lentz evaluation of
//   E_p(z) = e^(-z) / (z + p - 1·p / (z + p + 2 - 2(p+1) / (z + p + 4 - ...)))
// at z = -ix.
fn continued_fraction(alpha: f64, x: f64) -> Result<C64> {
    let z = C64::new(0.0, -x);
    let mut b = z + alpha;
    let mut c = C64::new(1.0 / FPMIN, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = i as f64;
        let an = -i * (alpha - 1.0 + i);
        b += 2.0;
        d = d * an + b;
        if d.norm() < FPMIN {
            d = C64::new(FPMIN, 0.0);
        }
        d = d.inv();
        c = b + c.inv() * an;
        if c.norm() < FPMIN {
            c = C64::new(FPMIN, 0.0);
        }
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() <= f64::EPSILON {
            return Ok(h * C64::from_polar(1.0, x));
        }
    }
    Err(Error::Integrator(format!(
        "continued fraction for E_{alpha}(i{x}) did not converge"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // ∫₁^∞ e^(ixu) du = -e^(ix)/(ix) = i e^(ix) / x
    fn alpha_zero(x: f64) -> C64 {
        C64::i() * C64::from_polar(1.0, x) / x
    }

    #[test]
    fn alpha_zero_closed_form() {
        for x in [0.5, 1.0, 5.0, 1e-3, 1.49, 1.51, 250.0] {
            let v = gen_exp_integral(0.0, x).unwrap();
            assert!(rel(v, alpha_zero(x)) < 1e-13, "x={x} v={v}");
        }
        let v = gen_exp_integral(0.0, 1.0).unwrap();
        assert!((v.re + 0.841_470_984_807_896_5).abs() < 1e-14);
        assert!((v.im - 0.540_302_305_868_139_8).abs() < 1e-14);
    }

    #[test]
    fn half_order_reduces_to_fresnel() {
        // 2[(1/2 - C(1)) + i(1/2 - S(1))] with C(1), S(1) from the series
        // definition: C(1) = 0.7798934003768228, S(1) = 0.4382591473903548.
        let expected = C64::new(
            2.0 * (0.5 - 0.779_893_400_376_822_8),
            2.0 * (0.5 - 0.438_259_147_390_354_8),
        );
        let v = gen_exp_integral(0.5, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(rel(v, expected) < 1e-13, "{v} vs {expected}");
        let w = gen_exp_integral(0.5, -std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(w, v.conj());
    }

    #[test]
    fn branches_agree_at_switch() {
        for alpha in [0.0, 0.2, 0.5, 0.8, 0.95] {
            let s = series(alpha, SERIES_LIMIT);
            let c = continued_fraction(alpha, SERIES_LIMIT).unwrap();
            assert!(rel(s, c) < 1e-13, "alpha={alpha}: {s} vs {c}");
            let s = series(alpha, 3.0);
            let c = continued_fraction(alpha, 3.0).unwrap();
            assert!(rel(s, c) < 1e-12, "alpha={alpha}: {s} vs {c}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(gen_exp_integral(0.5, 0.0), Err(Error::Divergent(_))));
        assert!(matches!(gen_exp_integral(1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gen_exp_integral(-0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gen_exp_integral(0.5, 2e6), Err(Error::Domain(_))));
        assert!(gen_exp_integral(0.5, f64::NAN).is_err());
    }

    #[test]
    fn large_argument_is_finite() {
        let v = gen_exp_integral(0.3, 9.9e5).unwrap();
        // Leading asymptotic term: i e^(ix) / x.
        let lead = alpha_zero(9.9e5);
        assert!(rel(v, lead) < 1e-5);
    }
}
