//! Closed-form charging results.
//!
//! These serve as fast paths for users and as independent checks on the
//! integrator.
//!
//! On the power-law ramp the battery amplitude obeys, in the phase variable
//! `s = θ(t)/(1+r)`, the forced oscillator `b'' + b = -c s^(-α)`. Its causal
//! solution from rest gives
//!
//! ```text
//! E_B(t) = ω₀ (F t / (1+r))² J_α(s)²,   J_α(s) = ∫₀¹ u^(-α) sin(s(1-u)) du
//!        = Im[ e^{is} ( Γ(1-α) (is)^(α-1) - E_α(-is) ) ]
//! ```
//!
//! with `E_α(ix) = ∫₁^∞ u^(-α) e^{ixu} du` the generalised exponential
//! integral. The `Γ(1-α)` term is the complete integral `∫₀^∞`; dropping it
//! breaks the `r = 0` limit, where `J_0(s) = (1 - cos s)/s` must reproduce
//! the `sin⁴(g t / 2)` constant-coupling result.

use std::collections::HashMap;
use std::f64::consts::{E, PI};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{QuenchProtocol, Ramp, SystemParams};
use crate::specfun::{fresnel, gamma, gen_exp_integral, lambert_w_branch_minus1, maximize_scalar};

// J_α is summed directly below this phase, where the Γ and E_α terms cancel.
const OVERLAP_SERIES_LIMIT: f64 = 1.0;

/// Closed-form location and height of the first battery maximum on a
/// power-law ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPrediction {
    /// Phase `θ_m = k t_m^(1+r)` at the maximum; depends on `r` only.
    pub theta_m: f64,
    pub t_m: f64,
    pub e_bm: f64,
    pub p_bm: f64,
    /// Ramp rate `k = g_f / τ_Q^r`.
    pub k: f64,
}

fn require_lossless(params: &SystemParams, what: &str) -> Result<()> {
    if params.gamma() != 0.0 {
        return Err(Error::Unsupported(format!(
            "{what} has no closed form with charger dissipation (gamma = {})",
            params.gamma()
        )));
    }
    Ok(())
}

/// Battery energy for constant coupling `g_f` switched on at `t = 0`:
/// `4 ω₀ F² / g_f² · sin⁴(g_f t / 2)`.
pub fn energy_constant_coupling(params: &SystemParams, g_f: f64, t: f64) -> Result<f64> {
    require_lossless(params, "constant-coupling energy")?;
    if !(g_f > 0.0 && g_f.is_finite()) {
        return Err(Error::domain(format!("g_f must be > 0, got {g_f}")));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let f = params.drive();
    Ok(4.0 * params.omega0() * f * f / (g_f * g_f) * (0.5 * g_f * t).sin().powi(4))
}

/// Ramp overlap integral `J_α(s) = ∫₀¹ u^(-α) sin(s(1-u)) du`.
pub fn ramp_overlap(alpha: f64, s: f64) -> Result<f64> {
    Ok(ramp_kernel(alpha, s)?.im)
}

// K(s) = ∫₀¹ u^(-α) e^{is(1-u)} du, so that J_α = Im K.
fn ramp_kernel(alpha: f64, s: f64) -> Result<C64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("phase must be finite and >= 0, got {s}")));
    }
    if s <= OVERLAP_SERIES_LIMIT {
        return Ok(kernel_series(alpha, s));
    }
    let a = 1.0 - alpha;
    let complete = C64::from_polar(gamma(a) * s.powf(-a), -0.5 * PI * a);
    let tail = gen_exp_integral(alpha, -s)?;
    Ok(C64::from_polar(1.0, s) * (complete - tail))
}

// Σ_m (is)^m / [a (a+1) ... (a+m)],  a = 1 - α.
fn kernel_series(alpha: f64, s: f64) -> C64 {
    let a = 1.0 - alpha;
    let mut term = C64::new(1.0 / a, 0.0);
    let mut sum = term;
    for m in 1..400 {
        term *= C64::new(0.0, s) / (a + m as f64);
        sum += term;
        if term.norm() <= 0.25 * f64::EPSILON * sum.norm() {
            break;
        }
    }
    sum
}

/// Battery energy on a power-law ramp, `0 <= t <= τ_Q`, without dissipation.
pub fn energy_quench_closed(params: &SystemParams, protocol: &QuenchProtocol, t: f64) -> Result<f64> {
    require_lossless(params, "ramp energy")?;
    let Ramp::PowerLaw(r) = protocol.ramp() else {
        return Err(Error::Unsupported("closed-form ramp energy needs a power-law ramp".into()));
    };
    if !(t >= 0.0) || t > protocol.tau_q() {
        return Err(Error::domain(format!(
            "closed form holds on the ramp 0 <= t <= tau_q = {}, got t = {t}",
            protocol.tau_q()
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let s = protocol.theta(t)? / (1.0 + r);
    let j = ramp_overlap(protocol.alpha(), s)?;
    let amp = params.drive() * t / (1.0 + r);
    Ok(params.omega0() * amp * amp * j * j)
}

/// Peak phase `θ_m` for ramp exponent `r`: the first maximum of
/// `s^(2(1-α)) J_α(s)²`, converted to `θ = (1+r) s`. Memoised per `r`.
pub fn theta_m(r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::domain(format!("ramp exponent must be finite and >= 0, got {r}")));
    }
    type Cache = Mutex<HashMap<u64, Arc<OnceLock<Result<f64>>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cell = {
        let mut map = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
        Arc::clone(map.entry(r.to_bits()).or_default())
    };
    cell.get_or_init(|| compute_theta_m(r)).clone()
}

fn compute_theta_m(r: f64) -> Result<f64> {
    let alpha = r / (r + 1.0);
    let expo = 2.0 * (1.0 - alpha);
    let mut failure = None;
    let objective = |s: f64| match ramp_overlap(alpha, s) {
        Ok(j) => s.powf(expo) * j * j,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    // The first maximum lies in (0, 2π] for every r >= 0.
    let best = maximize_scalar(objective, 0.0, 2.0 * PI, 1e-12);
    if let Some(e) = failure {
        return Err(e);
    }
    let s0 = best?.arg;
    Ok((1.0 + r) * refine_stationary(alpha, s0)?)
}

// d/ds [s^(2(1-α)) J²] = 2 s^(2(1-α)) J Re K, so an interior maximum with
// J != 0 is a sign change of Re K. Bisecting it recovers the digits that a
// search on the flat top of the objective cannot resolve.
fn refine_stationary(alpha: f64, s0: f64) -> Result<f64> {
    let re = |s: f64| ramp_kernel(alpha, s).map(|k| k.re);
    let delta = 1e-6 * s0.max(1.0);
    let (mut lo, mut hi) = (s0 - delta, s0 + delta);
    let (mut f_lo, f_hi) = (re(lo)?, re(hi)?);
    if lo <= 0.0 || f_lo.signum() == f_hi.signum() {
        return Ok(s0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = re(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Predicted first maximum for a slow power-law quench without dissipation.
///
/// Fails with [`Error::Regime`] when the maximum would fall after `τ_Q`,
/// where the ramp solution no longer applies; integrate the dynamics instead.
pub fn peak_prediction(params: &SystemParams, protocol: &QuenchProtocol) -> Result<PeakPrediction> {
    require_lossless(params, "peak prediction")?;
    let Ramp::PowerLaw(r) = protocol.ramp() else {
        return Err(Error::Unsupported("peak prediction needs a power-law ramp".into()));
    };
    if protocol.g_f() <= 0.0 {
        return Err(Error::domain("peak prediction needs g_f > 0"));
    }
    let theta = theta_m(r)?;
    let k = protocol.k()?;
    let t_m = (theta / k).powf(1.0 / (1.0 + r));
    if t_m > protocol.tau_q() {
        return Err(Error::Regime(format!(
            "predicted peak t_m = {t_m:.6} lies after tau_q = {}; use the dynamics integrator",
            protocol.tau_q()
        )));
    }
    let j = ramp_overlap(protocol.alpha(), theta / (1.0 + r))?;
    let amp = params.drive() * t_m / (1.0 + r);
    let e_bm = params.omega0() * amp * amp * j * j;
    Ok(PeakPrediction { theta_m: theta, t_m, e_bm, p_bm: e_bm / t_m, k })
}

/// Residuals of candidate Fresnel-form stationarity conditions for the
/// linear ramp, evaluated at phase `theta`. The common left-hand side is
/// `(C² - S²) / (2CS)` with `C, S` at `√(θ/π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelResiduals {
    pub theta: f64,
    pub lhs: f64,
    /// `lhs - cot(θ²/2)`
    pub squared_half: f64,
    /// `lhs - cot(θ/2)`
    pub half: f64,
    /// `lhs - cot(θ)`
    pub full: f64,
}

impl FresnelResiduals {
    /// Name of the condition with the smallest residual, if below `tol`.
    pub fn satisfied(&self, tol: f64) -> Option<&'static str> {
        [("cot(theta^2/2)", self.squared_half), ("cot(theta/2)", self.half), ("cot(theta)", self.full)]
            .into_iter()
            .filter(|(_, r)| r.abs() <= tol)
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(n, _)| n)
    }
}

pub fn fresnel_peak_residuals(theta: f64) -> FresnelResiduals {
    let (c, s) = fresnel((theta / PI).sqrt());
    let lhs = (c * c - s * s) / (2.0 * c * s);
    let cot = |x: f64| x.cos() / x.sin();
    FresnelResiduals {
        theta,
        lhs,
        squared_half: lhs - cot(0.5 * theta * theta),
        half: lhs - cot(0.5 * theta),
        full: lhs - cot(theta),
    }
}

/// Energy of a driven, dissipative charger that is not coupled to the
/// battery: `4 ω₀ F² / γ² · (e^(-γt/2) - 1)²`, tending to `ω₀ F² t²` as γ → 0.
pub fn charger_energy_decoupled(params: &SystemParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let f = params.drive();
    let w = params.omega0();
    let g = params.gamma();
    let x = g * t;
    if x < 1e-6 {
        return Ok(w * f * f * t * t * (1.0 - 0.5 * x + 7.0 / 48.0 * x * x));
    }
    let m = (-0.5 * x).exp_m1();
    Ok(4.0 * w * f * f / (g * g) * m * m)
}

/// Normalised shape of the step-ramp peak power versus quench time,
/// `(e^(-γτ/2) - 1)² / (τ γ²)`. This is a proportionality, not an absolute
/// power.
pub fn power_scaling_step(params: &SystemParams, tau_q: f64) -> Result<f64> {
    let g = params.gamma();
    if !(g > 0.0) {
        return Err(Error::domain("step power scaling requires gamma > 0"));
    }
    if !(tau_q > 0.0 && tau_q.is_finite()) {
        return Err(Error::domain(format!("tau_q must be > 0, got {tau_q}")));
    }
    let m = (-0.5 * g * tau_q).exp_m1();
    Ok(m * m / (tau_q * g * g))
}

/// Quench time maximising [`power_scaling_step`]:
/// `τ = |2 W₋₁(-1/(2√e)) + 1| / γ ≈ 2.5129 / γ`, i.e. `τ = 2x/γ` with `x` the
/// positive root of `e^x = 1 + 2x`.
pub fn optimal_tauq_step(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be > 0, got {gamma}")));
    }
    let w = lambert_w_branch_minus1(-0.5 / E.sqrt())?;
    Ok((2.0 * w + 1.0).abs() / gamma)
}
