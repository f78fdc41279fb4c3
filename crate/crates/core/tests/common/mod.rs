//! Brute-force reference implementations used by the integration tests.
//! Nothing here calls the production special functions.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(20))
}

fn panel<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> C64 {
    let (x, w) = gl20();
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| f(m + h * xi) * *wi).sum::<C64>() * h
}

/// `∫₁^U u^(-α) e^{ixu - ε(u-1)} du` with `U` where the damping reaches e^-45.
/// Past `u = 1 + 2π/x` the panels are exact half periods, so the phase of
/// each panel start is `x + kπ` and never rounds.
fn damped_expint(alpha: f64, x: f64, eps: f64) -> C64 {
    let hp = PI / x;
    let amp = |v: f64| (1.0 + v).powf(-alpha) * (-eps * v).exp();
    let base = C64::from_polar(1.0, x);
    let upper = 45.0 / eps;

    let v0 = 2.0 * hp;
    let mut sum = C64::new(0.0, 0.0);
    let mut a = 0.0;
    while a < v0 {
        let b = (a + hp.min(0.5 * (1.0 + a))).min(v0);
        sum += panel(&|v: f64| C64::from_polar(amp(v), x * v), a, b);
        a = b;
    }
    let mut tail = C64::new(0.0, 0.0);
    let mut k = 0u64;
    loop {
        let start = v0 + k as f64 * hp;
        if start >= upper {
            break;
        }
        let p = panel(&|w: f64| C64::from_polar(amp(start + w), x * w), 0.0, hp);
        tail += if k % 2 == 0 { p } else { -p };
        k += 1;
    }
    base * (sum + tail)
}

/// `E_α(x)` for `x > 0` as the ε → 0⁺ limit of the damped integral, by
/// Richardson extrapolation over ε = x/2^j, j = 1..10.
pub fn expint_damped_oracle(alpha: f64, x: f64) -> C64 {
    if x < 0.0 {
        return expint_damped_oracle(alpha, -x).conj();
    }
    let levels = 10;
    let mut t: Vec<C64> = (1..=levels).map(|j| damped_expint(alpha, x, x / 2f64.powi(j))).collect();
    for k in 1..levels as usize {
        let f = 2f64.powi(k as i32);
        for j in (k..t.len()).rev() {
            t[j] = (t[j] * f - t[j - 1]) / (f - 1.0);
        }
    }
    t[levels as usize - 1]
}

/// `E_α(x) = ∫₁^∞ u^(-α) e^{ixu} du` on the rotated contour
/// `u = 1 + i w/x`, where the integrand decays like `e^-w` without
/// oscillating. Negative `x` follows from conjugation.
pub fn expint_contour_oracle(alpha: f64, x: f64) -> C64 {
    if x < 0.0 {
        return expint_contour_oracle(alpha, -x).conj();
    }
    let g = |w: f64| C64::new(1.0, w / x).powf(-alpha) * (-w).exp();
    let mut edges = vec![0.0];
    let mut e = x.min(1.0) * 1e-3;
    while e < 1.0 {
        edges.push(e);
        e *= 4.0;
    }
    edges.extend([1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 48.0, 64.0, 80.0]);
    let mut sum = C64::new(0.0, 0.0);
    for w in edges.windows(2) {
        let re = integrate(|v| g(v).re, w[0], w[1], 1e-17);
        let im = integrate(|v| g(v).im, w[0], w[1], 1e-17);
        sum += C64::new(re, im);
    }
    C64::new(0.0, 1.0) * C64::from_polar(1.0, x) / x * sum
}

// Gauss-Kronrod 7/15 nodes and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod value, Kronrod-Gauss difference and the integral of `|f|`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut l1 = fc.abs() * WGK[7];
    for i in 0..7 {
        let (f1, f2) = (f(c - h * XGK[i]), f(c + h * XGK[i]));
        let s = f1 + f2;
        l1 += WGK[i] * (f1.abs() + f2.abs());
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs(), l1 * h.abs())
}

/// Adaptive Gauss-Kronrod quadrature to absolute tolerance `tol`, or until
/// the error estimate reaches the rounding level of the sub-interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err, l1) = gk15(f, a, b);
        if err <= tol || err <= 50.0 * f64::EPSILON * l1 || depth > 50 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(&f, a, b, tol, 0)
}

/// Fresnel integrals by adaptive quadrature of the defining integrals on
/// quarter-unit sub-intervals.
pub fn fresnel_oracle(z: f64) -> (f64, f64) {
    let sign = z.signum();
    let z = z.abs();
    let (mut c, mut s) = (0.0, 0.0);
    let mut a = 0.0;
    while a < z {
        let b = (a + 0.25).min(z);
        c += integrate(|u| (0.5 * PI * u * u).cos(), a, b, 1e-17);
        s += integrate(|u| (0.5 * PI * u * u).sin(), a, b, 1e-17);
        a = b;
    }
    (sign * c, sign * s)
}

/// Lower branch of Lambert W by bisection of `w e^w - x` on `[-60, -1]`.
pub fn lambert_oracle(x: f64) -> f64 {
    let f = |w: f64| w * w.exp() - x;
    let (mut lo, mut hi) = (-60.0f64, -1.0f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // f decreases from ~0⁻ - x > 0 at lo to -1/e - x < 0 at hi.
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫₀¹ u^(-α) e^{is(1-u)} du` by quadrature after `u = v^(1/(1-α))`,
/// which removes the endpoint singularity.
pub fn ramp_kernel_oracle(alpha: f64, s: f64) -> C64 {
    let a = 1.0 - alpha;
    let phase = |v: f64| s * (1.0 - v.powf(1.0 / a));
    let re = integrate(|v| phase(v).cos(), 0.0, 1.0, 1e-15) / a;
    let im = integrate(|v| phase(v).sin(), 0.0, 1.0, 1e-15) / a;
    C64::new(re, im)
}

/// Battery energy on a power-law ramp from the quadrature kernel.
pub fn ramp_energy_oracle(omega0: f64, f: f64, g_f: f64, tau: f64, r: f64, t: f64) -> f64 {
    let theta = g_f / tau.powf(r) * t.powf(1.0 + r);
    let j = ramp_kernel_oracle(r / (1.0 + r), theta / (1.0 + r)).im;
    omega0 * (f * t / (1.0 + r)).powi(2) * j * j
}

/// Peak phase for exponent `r`: `(1+r)` times the first sign change of
/// `Re K`, located by a scan and bisection.
pub fn theta_m_oracle(r: f64) -> f64 {
    let alpha = r / (1.0 + r);
    let re = |s: f64| ramp_kernel_oracle(alpha, s).re;
    let n = 400;
    let step = 2.0 * PI / n as f64;
    let mut lo = step;
    let mut f_lo = re(lo);
    for i in 2..=n {
        let hi = step * i as f64;
        let f_hi = re(hi);
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if re(m).signum() == f_lo.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return (1.0 + r) * 0.5 * (a + b);
        }
        lo = hi;
        f_lo = f_hi;
    }
    f64::NAN
}

/// Log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
