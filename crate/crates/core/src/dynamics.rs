//! First-moment dynamics of the driven charger–battery pair.
//!
//! For a vacuum start the state stays a product of coherent states, so the
//! amplitudes `⟨a⟩`, `⟨b⟩` determine every energy:
//!
//! ```text
//! d⟨a⟩/dt = -i (g(t) ⟨b⟩ + F) - (γ/2) ⟨a⟩
//! d⟨b⟩/dt = -i g(t) ⟨a⟩
//! ```
//!
//! The quantum-jump part of the charger dissipator drops out of these
//! equations, which is why the non-Hermitian damping term is all that remains.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{QuenchProtocol, SystemParams};
use crate::ode::{Dopri5, GridSampler, Tolerance};

/// Amplitudes `⟨a⟩(t)` and `⟨b⟩(t)` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    params: SystemParams,
    protocol: QuenchProtocol,
    times: Vec<f64>,
    a_amp: Vec<C64>,
    b_amp: Vec<C64>,
    integrator_tol: f64,
}

impl Trajectory {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn protocol(&self) -> &QuenchProtocol {
        &self.protocol
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Charger amplitude `⟨a⟩`.
    pub fn a_amp(&self) -> &[C64] {
        &self.a_amp
    }

    /// Battery amplitude `⟨b⟩`.
    pub fn b_amp(&self) -> &[C64] {
        &self.b_amp
    }

    pub fn integrator_tol(&self) -> f64 {
        self.integrator_tol
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

const LOCAL_TOL_FACTOR: f64 = 0.05;

/// First battery maximum: time, stored energy and average power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t_m: f64,
    pub e_bm: f64,
    pub p_bm: f64,
}

/// Charger/battery energies and average battery power along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub e_a: Vec<f64>,
    pub e_b: Vec<f64>,
    /// `E_B / t`, with `P_B(0) = 0`.
    pub p_b: Vec<f64>,
    pub peak: Option<Peak>,
}

impl EnergyTrace {
    /// Builds `P_B` and the peak record from energy samples.
    pub fn from_energies(times: Vec<f64>, e_a: Vec<f64>, e_b: Vec<f64>) -> Self {
        let p_b = times
            .iter()
            .zip(&e_b)
            .map(|(&t, &e)| if t > 0.0 { e / t } else { 0.0 })
            .collect();
        let mut trace = Self { times, e_a, e_b, p_b, peak: None };
        trace.peak = find_first_peak(&trace);
        trace
    }
}

/// Integration horizon used when none is given: the quench plus three full
/// periods `2π/g_f` of the final coupling.
pub fn default_horizon(protocol: &QuenchProtocol) -> f64 {
    let g = protocol.g_f();
    // A charger that never couples has no coupling period; use unit time.
    let period_scale = if g > 0.0 { 1.0 / g } else { 1.0 };
    protocol.tau_q() + 6.0 * PI * period_scale
}

/// Uniform output grid `[0, horizon]` with `n_out` points.
pub fn uniform_grid(horizon: f64, n_out: usize) -> Vec<f64> {
    let last = n_out - 1;
    (0..n_out)
        .map(|i| if i == last { horizon } else { horizon * i as f64 / last as f64 })
        .collect()
}

/// Integrate the first-moment equations from the joint vacuum.
pub fn integrate_moments(
    params: &SystemParams,
    protocol: &QuenchProtocol,
    horizon: f64,
    n_out: usize,
    tol: f64,
) -> Result<Trajectory> {
    integrate_moments_from(params, protocol, (C64::new(0.0, 0.0), C64::new(0.0, 0.0)), horizon, n_out, tol)
}

/// Integrate the first-moment equations from arbitrary coherent amplitudes
/// `(⟨a⟩(0), ⟨b⟩(0))`.
pub fn integrate_moments_from(
    params: &SystemParams,
    protocol: &QuenchProtocol,
    initial: (C64, C64),
    horizon: f64,
    n_out: usize,
    tol: f64,
) -> Result<Trajectory> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::domain(format!("horizon must be > 0, got {horizon}")));
    }
    if n_out < 2 {
        return Err(Error::domain(format!("n_out must be >= 2, got {n_out}")));
    }
    if !(tol > 1e-14 && tol < 1e-3) {
        return Err(Error::domain(format!("tol must lie in (1e-14, 1e-3), got {tol}")));
    }

    let times = uniform_grid(horizon, n_out);
    let mut a_amp = vec![C64::new(0.0, 0.0); n_out];
    let mut b_amp = vec![C64::new(0.0, 0.0); n_out];
    a_amp[0] = initial.0;
    b_amp[0] = initial.1;

    let drive = params.drive();
    let half_gamma = 0.5 * params.gamma();
    // Error control is homogeneous in (F, initial amplitudes), so scaling the
    // drive scales the solution without changing the step sequence.
    let scale = drive.max(initial.0.norm()).max(initial.1.norm());
    let scale = if scale > 0.0 { scale } else { 1.0 };
    // Local control well below `tol` keeps the accumulated error, not just
    // the per-step error, near `tol` over tens of coupling periods.
    let local = LOCAL_TOL_FACTOR * tol;
    let tolerance = Tolerance { rtol: local, atol: local * scale };

    let mut y = [initial.0, initial.1];
    let mut solver = Dopri5::new(2);
    let mut sampler = GridSampler::new(&times, 1);
    let mut buf = [C64::new(0.0, 0.0); 2];

    let tau = protocol.tau_q();
    let mut pieces: Vec<(f64, f64, bool)> = Vec::with_capacity(2);
    if horizon <= tau {
        pieces.push((0.0, horizon, true));
    } else {
        pieces.push((0.0, tau, true));
        pieces.push((tau, horizon, false));
    }

    for (t0, t1, on_ramp) in pieces {
        let g_f = protocol.g_f();
        let coupling = |t: f64| if on_ramp { protocol.ramp_coupling(t) } else { g_f };
        let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            let g = coupling(t);
            dy[0] = C64::new(0.0, -1.0) * (y[1] * g + drive) - y[0] * half_gamma;
            dy[1] = C64::new(0.0, -g) * y[0];
        };
        // Conservative start: r < 1 ramps have an unbounded derivative at 0.
        let h_init = if on_ramp { (tau * 1e-6).min(t1 - t0) } else { (t1 - t0) * 1e-6 };
        solver.integrate(&mut rhs, t0, t1, &mut y, tolerance, h_init, |step| {
            sampler.drain(step, |i, t, s| {
                s.eval(t, &mut buf);
                a_amp[i] = buf[0];
                b_amp[i] = buf[1];
            });
            Ok(())
        })?;
    }
    debug_assert_eq!(sampler.next_index(), n_out);

    Ok(Trajectory {
        params: *params,
        protocol: *protocol,
        times,
        a_amp,
        b_amp,
        integrator_tol: tol,
    })
}

/// Energies `E_A = ω₀|⟨a⟩|²`, `E_B = ω₀|⟨b⟩|²`, power and first peak.
pub fn energy_trace(traj: &Trajectory) -> EnergyTrace {
    let w = traj.params.omega0();
    let e_a = traj.a_amp.iter().map(|a| w * a.norm_sqr()).collect();
    let e_b = traj.b_amp.iter().map(|b| w * b.norm_sqr()).collect();
    EnergyTrace::from_energies(traj.times.clone(), e_a, e_b)
}

/// Earliest interior sample of `E_B` strictly above both neighbours, refined
/// by a parabola through the three samples. `None` if there is no such sample
/// (e.g. `E_B` still rising at the end of the horizon).
pub fn find_first_peak(trace: &EnergyTrace) -> Option<Peak> {
    first_peak(&trace.times, &trace.e_b)
}

pub(crate) fn first_peak(times: &[f64], values: &[f64]) -> Option<Peak> {
    let n = times.len().min(values.len());
    if n < 3 {
        return None;
    }
    let i = (1..n - 1).find(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])?;
    let (ym, y0, yp) = (values[i - 1], values[i], values[i + 1]);
    let h = 0.5 * (times[i + 1] - times[i - 1]);
    let b = (yp - ym) / (2.0 * h);
    let c = (yp - 2.0 * y0 + ym) / (2.0 * h * h);
    let (t_m, e_bm) = if c < 0.0 {
        let x = (-b / (2.0 * c)).clamp(-h, h);
        (times[i] + x, y0 + b * x + c * x * x)
    } else {
        (times[i], y0)
    };
    let p_bm = if t_m > 0.0 { e_bm / t_m } else { 0.0 };
    Some(Peak { t_m, e_bm, p_bm })
}
