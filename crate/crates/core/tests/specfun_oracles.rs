mod common;

use std::f64::consts::{E, PI};

use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qbattery_core::specfun::{fresnel, gamma, gen_exp_integral, lambert_w_branch_minus1, maximize_scalar};

const ALPHAS: [f64; 5] = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.9];

#[test]
fn gen_exp_integral_matches_damped_quadrature() {
    let mut worst = (0.0, 0.0, 0.0);
    for &alpha in &ALPHAS {
        for x in logspace(1e-3, 1e3, 40) {
            let got = gen_exp_integral(alpha, x).unwrap();
            let want = expint_damped_oracle(alpha, x);
            let err = (got - want).norm() / want.norm();
            if err > worst.0 {
                worst = (err, alpha, x);
            }
        }
    }
    assert!(worst.0 <= 1e-8, "worst relative error {:e} at alpha={} x={}", worst.0, worst.1, worst.2);
}

#[test]
fn gen_exp_integral_negative_argument_is_conjugate() {
    for &alpha in &ALPHAS {
        for x in [0.02, 0.8, 1.5, 7.0, 300.0] {
            let p = gen_exp_integral(alpha, x).unwrap();
            let m = gen_exp_integral(alpha, -x).unwrap();
            assert!((m - p.conj()).norm() <= 1e-12 * p.norm());
        }
    }
}

#[test]
fn gen_exp_integral_constant_kernel_closed_form() {
    for x in [1e-3, 0.3, 1.0, 1.5, 2.0, 40.0] {
        let want = C64::new(0.0, 1.0) * C64::from_polar(1.0, x) / x;
        let got = gen_exp_integral(0.0, x).unwrap();
        assert!((got - want).norm() <= 1e-12 * want.norm(), "x={x}");
    }
}

#[test]
fn gen_exp_integral_rejects_bad_input() {
    assert!(gen_exp_integral(1.0, 1.0).is_err());
    assert!(gen_exp_integral(-0.1, 1.0).is_err());
    assert!(gen_exp_integral(0.5, 0.0).is_err());
    assert!(gen_exp_integral(0.5, f64::NAN).is_err());
}

#[test]
fn fresnel_matches_quadrature() {
    let mut z = -10.0;
    while z <= 10.0 {
        let (c, s) = fresnel(z);
        let (co, so) = fresnel_oracle(z);
        assert!((c - co).abs() <= 1e-10 && (s - so).abs() <= 1e-10, "z={z}: ({c}, {s}) vs ({co}, {so})");
        z += 0.137;
    }
}

#[test]
fn fresnel_limits() {
    let (c, s) = fresnel(1e4);
    assert!((c - 0.5).abs() < 1e-4 && (s - 0.5).abs() < 1e-4);
    assert_eq!(fresnel(0.0), (0.0, 0.0));
}

#[test]
fn lambert_residual_and_oracle() {
    let lo = 1e-12;
    let hi = 1.0 / E;
    for m in logspace(lo, hi, 100) {
        let x = -m;
        let w = lambert_w_branch_minus1(x).unwrap();
        assert!(w <= -1.0);
        assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs(), "x={x}");
        if (x + 1.0 / E).abs() < 1e-14 {
            // w is ill-conditioned at the branch point; the residual is the check.
            continue;
        }
        let wo = lambert_oracle(x);
        assert!((w - wo).abs() <= 1e-9 * wo.abs().max(1.0), "x={x}: {w} vs {wo}");
    }
}

#[test]
fn lambert_domain() {
    assert!(lambert_w_branch_minus1(0.0).is_err());
    assert!(lambert_w_branch_minus1(-0.4).is_err());
    assert_eq!(lambert_w_branch_minus1(-1.0 / E).unwrap(), -1.0);
}

#[test]
fn gamma_reference_values() {
    assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
    assert!((gamma(5.0) - 24.0).abs() < 1e-12);
    assert!((gamma(1.0 / 3.0) - 2.678_938_534_707_747_6).abs() < 1e-13);
}

#[test]
fn maximize_scalar_picks_first_peak() {
    // sin has maxima at π/2 and 5π/2; the taller second hump must not win.
    let m = maximize_scalar(|x| x.sin() * (1.0 + 0.1 * x), 0.0, 9.0, 1e-12).unwrap();
    let want = {
        // d/dx: cos(x)(1+0.1x) + 0.1 sin(x) = 0 near π/2
        let mut x: f64 = 1.6;
        for _ in 0..50 {
            let f = x.cos() * (1.0 + 0.1 * x) + 0.1 * x.sin();
            let df = -x.sin() * (1.0 + 0.1 * x) + 0.2 * x.cos();
            x -= f / df;
        }
        x
    };
    assert!((m.arg - want).abs() < 1e-7, "{} vs {want}", m.arg);
}

proptest! {
    #[test]
    fn fresnel_is_odd(z in -20.0f64..20.0) {
        let (c1, s1) = fresnel(z);
        let (c2, s2) = fresnel(-z);
        prop_assert_eq!(c1, -c2);
        prop_assert_eq!(s1, -s2);
    }

    #[test]
    fn lambert_inverts_on_lower_branch(w in -40.0f64..-1.0001) {
        let x = w * w.exp();
        let back = lambert_w_branch_minus1(x).unwrap();
        prop_assert!((back - w).abs() <= 1e-8 * w.abs(), "{} vs {}", back, w);
    }

    #[test]
    fn gen_exp_integral_conjugation(alpha in 0.0f64..0.95, x in 1e-3f64..500.0) {
        let p = gen_exp_integral(alpha, x).unwrap();
        let m = gen_exp_integral(alpha, -x).unwrap();
        prop_assert!((m - p.conj()).norm() <= 1e-12 * p.norm());
    }
}
