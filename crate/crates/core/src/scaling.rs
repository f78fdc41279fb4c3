//! Sweeps over the quench time and power-law fits of the peak quantities.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::analytic;
use crate::dynamics::{self, Peak};
use crate::error::{Error, Result};
use crate::model::{QuenchProtocol, Ramp, SystemParams};

/// Largest output spacing of an ODE sweep trajectory, in units of `1/g_f`.
pub const SWEEP_DT: f64 = 0.05;
/// Fewest output samples of an ODE sweep trajectory.
pub const SWEEP_MIN_SAMPLES: usize = 2001;
/// Horizon multiplier for the single retry of a row without a peak.
pub const RETRY_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ode,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ode => "ode",
            Method::ClosedForm => "closed_form",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ode" => Ok(Method::Ode),
            "closed_form" | "closed-form" | "closed" => Ok(Method::ClosedForm),
            other => Err(Error::Config(format!("unknown sweep method {other:?} (expected ode or closed_form)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// No battery maximum inside the (retried) horizon.
    NoPeak,
    /// Closed form requested outside its regime.
    Regime,
    /// The integrator or closed form failed.
    Error,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NoPeak => "no_peak",
            RowStatus::Regime => "regime",
            RowStatus::Error => "error",
        }
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Peak record for one quench time. Failed rows keep their `tau_q` and carry
/// NaN in the peak fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub tau_q: f64,
    pub t_m: f64,
    pub e_bm: f64,
    pub p_bm: f64,
    pub source: Method,
    pub status: RowStatus,
    pub message: Option<String>,
}

impl SweepRow {
    fn ok(tau_q: f64, peak: Peak, source: Method) -> Self {
        Self {
            tau_q,
            t_m: peak.t_m,
            e_bm: peak.e_bm,
            p_bm: peak.p_bm,
            source,
            status: RowStatus::Ok,
            message: None,
        }
    }

    fn failed(tau_q: f64, source: Method, status: RowStatus, message: String) -> Self {
        Self {
            tau_q,
            t_m: f64::NAN,
            e_bm: f64::NAN,
            p_bm: f64::NAN,
            source,
            status,
            message: Some(message),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub method: Method,
    /// Integrator tolerance for ODE rows.
    pub tol: f64,
    /// Worker threads; 0 uses the global rayon pool.
    pub jobs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { method: Method::Ode, tol: 1e-10, jobs: 0 }
    }
}

/// Number of output samples used for an ODE sweep row over `horizon`.
pub fn sweep_samples(g_f: f64, horizon: f64) -> usize {
    let rate = if g_f > 0.0 { g_f } else { 1.0 };
    let n = (horizon * rate / SWEEP_DT).ceil() as usize + 1;
    n.max(SWEEP_MIN_SAMPLES)
}

/// Peak quantities for each quench time in `grid`, using `base` for the
/// ramp shape and final coupling. Rows come back in grid order whatever the
/// number of workers.
pub fn sweep_tauq(
    params: &SystemParams,
    base: &QuenchProtocol,
    grid: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if grid.len() < 3 {
        return Err(Error::domain(format!("sweep grid needs at least 3 points, got {}", grid.len())));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::domain("sweep grid values must be finite and > 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("sweep grid must be strictly ascending"));
    }
    if opts.method == Method::ClosedForm {
        if params.gamma() != 0.0 {
            return Err(Error::Unsupported("closed-form sweep requires gamma = 0".into()));
        }
        if base.ramp() == Ramp::Step {
            return Err(Error::Unsupported("closed-form sweep is not available for the step ramp".into()));
        }
    }

    let row = |&tau: &f64| sweep_point(params, base, tau, opts);
    let rows: Vec<SweepRow> = if opts.jobs == 0 {
        grid.par_iter().map(row).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Sweep(format!("cannot start worker pool: {e}")))?;
        pool.install(|| grid.par_iter().map(row).collect())
    };

    if rows.iter().all(|r| !r.is_ok()) {
        let first = rows.iter().find_map(|r| r.message.clone()).unwrap_or_default();
        return Err(Error::Sweep(format!("no grid point produced a peak (first failure: {first})")));
    }
    Ok(rows)
}

fn sweep_point(params: &SystemParams, base: &QuenchProtocol, tau: f64, opts: &SweepOptions) -> SweepRow {
    let protocol = match base.with_tau_q(tau) {
        Ok(p) => p,
        Err(e) => return SweepRow::failed(tau, opts.method, RowStatus::Error, e.to_string()),
    };
    match opts.method {
        Method::Ode => ode_point(params, &protocol, opts.tol),
        Method::ClosedForm => closed_point(params, &protocol),
    }
}

fn ode_point(params: &SystemParams, protocol: &QuenchProtocol, tol: f64) -> SweepRow {
    let tau = protocol.tau_q();
    let horizon = dynamics::default_horizon(protocol);
    for h in [horizon, RETRY_FACTOR * horizon] {
        let n_out = sweep_samples(protocol.g_f(), h);
        let peak = dynamics::integrate_moments(params, protocol, h, n_out, tol)
            .map(|traj| dynamics::energy_trace(&traj).peak);
        match peak {
            Ok(Some(pk)) => return SweepRow::ok(tau, pk, Method::Ode),
            Ok(None) => continue,
            Err(e) => return SweepRow::failed(tau, Method::Ode, RowStatus::Error, e.to_string()),
        }
    }
    SweepRow::failed(
        tau,
        Method::Ode,
        RowStatus::NoPeak,
        format!("no battery maximum within {} time units", RETRY_FACTOR * horizon),
    )
}

fn closed_point(params: &SystemParams, protocol: &QuenchProtocol) -> SweepRow {
    let tau = protocol.tau_q();
    if protocol.ramp() == Ramp::Constant {
        let g = protocol.g_f();
        if !(g > 0.0) {
            return SweepRow::failed(tau, Method::ClosedForm, RowStatus::Error, "g_f must be > 0".into());
        }
        let t_m = PI / g;
        return match analytic::energy_constant_coupling(params, g, t_m) {
            Ok(e) => SweepRow::ok(tau, Peak { t_m, e_bm: e, p_bm: e / t_m }, Method::ClosedForm),
            Err(e) => SweepRow::failed(tau, Method::ClosedForm, RowStatus::Error, e.to_string()),
        };
    }
    match analytic::peak_prediction(params, protocol) {
        Ok(pk) => SweepRow::ok(tau, Peak { t_m: pk.t_m, e_bm: pk.e_bm, p_bm: pk.p_bm }, Method::ClosedForm),
        Err(e @ Error::Regime(_)) => SweepRow::failed(tau, Method::ClosedForm, RowStatus::Regime, e.to_string()),
        Err(e) => SweepRow::failed(tau, Method::ClosedForm, RowStatus::Error, e.to_string()),
    }
}

/// Log-spaced grid from `lo` to `hi` inclusive with `per_decade` intervals
/// per factor of ten (rounded up so both ends are hit exactly).
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi.is_finite() && hi > lo) {
        return Err(Error::domain(format!("log grid needs 0 < lo < hi, got ({lo}, {hi})")));
    }
    if per_decade == 0 {
        return Err(Error::domain("log grid needs at least one point per decade"));
    }
    let (l0, l1) = (lo.log10(), hi.log10());
    let n = ((l1 - l0) * per_decade as f64 - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=n)
        .map(|i| match i {
            0 => lo,
            i if i == n => hi,
            i => 10f64.powf(l0 + (l1 - l0) * i as f64 / n as f64),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    EBm,
    PBm,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::EBm => "e_bm",
            Field::PBm => "p_bm",
        }
    }

    fn of(self, row: &SweepRow) -> f64 {
        match self {
            Field::EBm => row.e_bm,
            Field::PBm => row.p_bm,
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e_bm" | "ebm" | "energy" => Ok(Field::EBm),
            "p_bm" | "pbm" | "power" => Ok(Field::PBm),
            other => Err(Error::Config(format!("unknown fit field {other:?} (expected e_bm or p_bm)"))),
        }
    }
}

/// Least-squares line through `(ln τ_Q, ln field)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub field: Field,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

impl ScalingFit {
    pub fn predict(&self, tau_q: f64) -> f64 {
        (self.intercept + self.slope * tau_q.ln()).exp()
    }
}

/// Default lower edge of a fit window: ten times the constant-coupling peak
/// time, which keeps the fast-quench plateau out of the fit.
pub fn default_fit_lower(g_f: f64) -> f64 {
    10.0 * PI / if g_f > 0.0 { g_f } else { 1.0 }
}

/// Ordinary least squares of `ln field` on `ln τ_Q` over the successful
/// rows with `τ_Q` inside `window` (inclusive).
pub fn fit_power_law(rows: &[SweepRow], field: Field, window: (f64, f64)) -> Result<ScalingFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Fit(format!("degenerate fit window ({lo}, {hi})")));
    }
    let slack = 1e-9;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.is_ok() && r.tau_q >= lo * (1.0 - slack) && r.tau_q <= hi * (1.0 + slack))
        .map(|r| (r.tau_q, field.of(r)))
        .filter(|(_, v)| v.is_finite() && *v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Fit(format!("fit needs at least 3 usable rows in [{lo}, {hi}], found {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all rows in the fit window share one tau_q".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    let slope_stderr = (ss_res / (nf - 2.0) / sxx).sqrt();
    Ok(ScalingFit { field, slope, intercept, slope_stderr, r_squared, window, n_points: n })
}

/// Indices of successful rows whose `p_bm` exceeds both successful
/// neighbours.
pub fn power_local_maxima(rows: &[SweepRow]) -> Vec<usize> {
    let ok: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_ok()).collect();
    ok.windows(3)
        .filter(|w| rows[w[1]].p_bm > rows[w[0]].p_bm && rows[w[1]].p_bm > rows[w[2]].p_bm)
        .map(|w| w[1])
        .collect()
}

/// Quench time of maximal peak power, refined by a parabola through the
/// three points around the best row in `(ln τ_Q, ln P)`. `None` when the
/// maximum sits at either end of the grid.
pub fn detect_rolloff(rows: &[SweepRow]) -> Option<f64> {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok() && r.p_bm > 0.0).collect();
    if ok.len() < 3 {
        return None;
    }
    let j = (0..ok.len()).fold(0, |best, i| if ok[i].p_bm > ok[best].p_bm { i } else { best });
    if j == 0 || j == ok.len() - 1 {
        return None;
    }
    let x = [ok[j - 1].tau_q.ln(), ok[j].tau_q.ln(), ok[j + 1].tau_q.ln()];
    let y = [ok[j - 1].p_bm.ln(), ok[j].p_bm.ln(), ok[j + 1].p_bm.ln()];
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d12 - d01) / (x[2] - x[0]);
    if !(curv < 0.0) {
        return Some(ok[j].tau_q);
    }
    // Vertex of the Newton-form parabola.
    let vertex = 0.5 * (x[0] + x[1]) - d01 / (2.0 * curv);
    Some(vertex.clamp(x[0], x[2]).exp())
}
