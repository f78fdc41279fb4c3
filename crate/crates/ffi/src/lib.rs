//! C ABI over `qbattery-core`.
//!
//! Every function returns a [`QbStatus`]; results come back through out
//! pointers. On failure the message for the calling thread is available from
//! [`qb_last_error_message`]. Simulations and sweeps are returned as opaque
//! handles that must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qbattery_core::analytic;
use qbattery_core::dynamics::{self, EnergyTrace, Trajectory};
use qbattery_core::scaling::{self, Field, Method, RowStatus, SweepOptions, SweepRow};
use qbattery_core::specfun;
use qbattery_core::{Error, QuenchProtocol, Ramp, SystemParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Unsupported = 3,
    Regime = 4,
    Numerical = 5,
    Sweep = 6,
    Fit = 7,
    Cutoff = 8,
    Config = 9,
    Io = 10,
    NotFound = 11,
    BadLength = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbRamp {
    PowerLaw = 0,
    Constant = 1,
    Step = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbSystemParams {
    pub omega0: f64,
    pub drive: f64,
    pub gamma: f64,
}

/// `r` is read only for `QB_RAMP_POWER_LAW`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbProtocol {
    pub g_f: f64,
    pub tau_q: f64,
    pub ramp: QbRamp,
    pub r: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbColumn {
    Time = 0,
    ReA = 1,
    ImA = 2,
    ReB = 3,
    ImB = 4,
    EnergyA = 5,
    EnergyB = 6,
    PowerB = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QbPeak {
    pub t_m: f64,
    pub e_bm: f64,
    pub p_bm: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbMethod {
    Ode = 0,
    ClosedForm = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbRowStatus {
    Ok = 0,
    NoPeak = 1,
    Regime = 2,
    Error = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbSweepRow {
    pub tau_q: f64,
    pub t_m: f64,
    pub e_bm: f64,
    pub p_bm: f64,
    pub status: QbRowStatus,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbField {
    EnergyPeak = 0,
    PowerPeak = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QbFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QbPeakPrediction {
    pub theta_m: f64,
    pub t_m: f64,
    pub e_bm: f64,
    pub p_bm: f64,
    pub k: f64,
}

/// Integrated trajectory with its energy trace.
pub struct QbTrace {
    traj: Trajectory,
    trace: EnergyTrace,
}

/// Rows of a quench-time sweep.
pub struct QbSweep {
    rows: Vec<SweepRow>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QbStatus {
    match e {
        Error::Domain(_) => QbStatus::Domain,
        Error::Unsupported(_) => QbStatus::Unsupported,
        Error::Regime(_) => QbStatus::Regime,
        Error::Divergent(_)
        | Error::Evaluation { .. }
        | Error::Stiffness { .. }
        | Error::Divergence { .. }
        | Error::Integrator(_) => QbStatus::Numerical,
        Error::Sweep(_) => QbStatus::Sweep,
        Error::Fit(_) => QbStatus::Fit,
        Error::Cutoff { .. } => QbStatus::Cutoff,
        Error::Config(_) => QbStatus::Config,
        Error::Io(_) => QbStatus::Io,
    }
}

struct Fail(QbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QbStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, recording any error or panic for [`qb_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QbStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            QbStatus::Panic
        }
    }
}

unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn params_of(p: &QbSystemParams) -> Result<SystemParams, Fail> {
    Ok(SystemParams::new(p.omega0, p.drive, p.gamma)?)
}

fn protocol_of(p: &QbProtocol) -> Result<QuenchProtocol, Fail> {
    let ramp = match p.ramp {
        QbRamp::PowerLaw => Ramp::PowerLaw(p.r),
        QbRamp::Constant => Ramp::Constant,
        QbRamp::Step => Ramp::Step,
    };
    Ok(QuenchProtocol::new(p.g_f, p.tau_q, ramp)?)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `qb_` call on the same thread.
#[no_mangle]
pub extern "C" fn qb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Integrate the charging dynamics on `n_out` uniform samples of
/// `[0, horizon]`. A non-positive `horizon` selects the default.
///
/// # Safety
/// `params` and `protocol` must point to valid structs and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_simulate(
    params: *const QbSystemParams,
    protocol: *const QbProtocol,
    horizon: f64,
    n_out: usize,
    tol: f64,
    out: *mut *mut QbTrace,
) -> QbStatus {
    guard(|| {
        let p = params_of(read(params, "params")?)?;
        let q = protocol_of(read(protocol, "protocol")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let horizon = if horizon > 0.0 { horizon } else { dynamics::default_horizon(&q) };
        let traj = dynamics::integrate_moments(&p, &q, horizon, n_out, tol)?;
        let trace = dynamics::energy_trace(&traj);
        write(out, Box::into_raw(Box::new(QbTrace { traj, trace })), "out")
    })
}

/// Number of samples in `trace`, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a handle from [`qb_simulate`].
#[no_mangle]
pub unsafe extern "C" fn qb_trace_len(trace: *const QbTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.trace.times.len())
}

/// Copy one column into `dst`, which must hold exactly `len` values.
///
/// # Safety
/// `trace` must be a live handle and `dst` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qb_trace_copy_column(
    trace: *const QbTrace,
    column: QbColumn,
    dst: *mut f64,
    len: usize,
) -> QbStatus {
    guard(|| {
        let t = read(trace, "trace")?;
        if dst.is_null() {
            return Err(null("dst"));
        }
        let n = t.trace.times.len();
        if len != n {
            return Err(Fail(QbStatus::BadLength, format!("buffer holds {len} values, trace has {n}")));
        }
        let out = std::slice::from_raw_parts_mut(dst, n);
        let (a, b) = (t.traj.a_amp(), t.traj.b_amp());
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = match column {
                QbColumn::Time => t.trace.times[i],
                QbColumn::ReA => a[i].re,
                QbColumn::ImA => a[i].im,
                QbColumn::ReB => b[i].re,
                QbColumn::ImB => b[i].im,
                QbColumn::EnergyA => t.trace.e_a[i],
                QbColumn::EnergyB => t.trace.e_b[i],
                QbColumn::PowerB => t.trace.p_b[i],
            };
        }
        Ok(())
    })
}

/// First battery maximum. `QB_STATUS_NOT_FOUND` when the trace has none.
///
/// # Safety
/// `trace` must be a live handle and `peak` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_trace_peak(trace: *const QbTrace, peak: *mut QbPeak) -> QbStatus {
    guard(|| {
        let t = read(trace, "trace")?;
        let pk = t.trace.peak.ok_or_else(|| Fail(QbStatus::NotFound, "trace has no interior maximum".into()))?;
        write(peak, QbPeak { t_m: pk.t_m, e_bm: pk.e_bm, p_bm: pk.p_bm }, "peak")
    })
}

/// Release a trace. Null is ignored.
///
/// # Safety
/// `trace` must be null or a handle from [`qb_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_trace_free(trace: *mut QbTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Peak energy and power for each quench time in `grid[0..n]` (ascending).
/// `jobs = 0` uses all cores; results do not depend on it.
///
/// # Safety
/// `grid` must be valid for `n` reads and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_sweep(
    params: *const QbSystemParams,
    protocol: *const QbProtocol,
    grid: *const f64,
    n: usize,
    method: QbMethod,
    tol: f64,
    jobs: usize,
    out: *mut *mut QbSweep,
) -> QbStatus {
    guard(|| {
        let p = params_of(read(params, "params")?)?;
        let q = protocol_of(read(protocol, "protocol")?)?;
        if grid.is_null() {
            return Err(null("grid"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = std::slice::from_raw_parts(grid, n);
        let method = match method {
            QbMethod::Ode => Method::Ode,
            QbMethod::ClosedForm => Method::ClosedForm,
        };
        let rows = scaling::sweep_tauq(&p, &q, grid, &SweepOptions { method, tol, jobs })?;
        write(out, Box::into_raw(Box::new(QbSweep { rows })), "out")
    })
}

/// Number of rows in `sweep`, or 0 for a null handle.
///
/// # Safety
/// `sweep` must be null or a handle from [`qb_sweep`].
#[no_mangle]
pub unsafe extern "C" fn qb_sweep_len(sweep: *const QbSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.rows.len())
}

/// # Safety
/// `sweep` must be a live handle and `row` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_sweep_row(sweep: *const QbSweep, index: usize, row: *mut QbSweepRow) -> QbStatus {
    guard(|| {
        let s = read(sweep, "sweep")?;
        let r = s
            .rows
            .get(index)
            .ok_or_else(|| Fail(QbStatus::BadLength, format!("row {index} out of range ({})", s.rows.len())))?;
        let status = match r.status {
            RowStatus::Ok => QbRowStatus::Ok,
            RowStatus::NoPeak => QbRowStatus::NoPeak,
            RowStatus::Regime => QbRowStatus::Regime,
            RowStatus::Error => QbRowStatus::Error,
        };
        write(row, QbSweepRow { tau_q: r.tau_q, t_m: r.t_m, e_bm: r.e_bm, p_bm: r.p_bm, status }, "row")
    })
}

/// Log-log least-squares fit over `[lo, hi]`.
///
/// # Safety
/// `sweep` must be a live handle and `fit` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_sweep_fit(sweep: *const QbSweep, field: QbField, lo: f64, hi: f64, fit: *mut QbFit) -> QbStatus {
    guard(|| {
        let s = read(sweep, "sweep")?;
        let field = match field {
            QbField::EnergyPeak => Field::EBm,
            QbField::PowerPeak => Field::PBm,
        };
        let f = scaling::fit_power_law(&s.rows, field, (lo, hi))?;
        let value = QbFit {
            slope: f.slope,
            intercept: f.intercept,
            slope_stderr: f.slope_stderr,
            r_squared: f.r_squared,
            n_points: f.n_points,
        };
        write(fit, value, "fit")
    })
}

/// Quench time of the interior power maximum; `QB_STATUS_NOT_FOUND` when
/// the power is monotone over the grid.
///
/// # Safety
/// `sweep` must be a live handle and `tau_q` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_sweep_rolloff(sweep: *const QbSweep, tau_q: *mut f64) -> QbStatus {
    guard(|| {
        let s = read(sweep, "sweep")?;
        let t = scaling::detect_rolloff(&s.rows).ok_or_else(|| Fail(QbStatus::NotFound, "no interior power maximum".into()))?;
        write(tau_q, t, "tau_q")
    })
}

/// Release a sweep. Null is ignored.
///
/// # Safety
/// `sweep` must be null or a handle from [`qb_sweep`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_sweep_free(sweep: *mut QbSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_theta_m(r: f64, out: *mut f64) -> QbStatus {
    guard(|| write(out, analytic::theta_m(r)?, "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_peak_prediction(
    params: *const QbSystemParams,
    protocol: *const QbProtocol,
    out: *mut QbPeakPrediction,
) -> QbStatus {
    guard(|| {
        let p = params_of(read(params, "params")?)?;
        let q = protocol_of(read(protocol, "protocol")?)?;
        let pr = analytic::peak_prediction(&p, &q)?;
        let value = QbPeakPrediction { theta_m: pr.theta_m, t_m: pr.t_m, e_bm: pr.e_bm, p_bm: pr.p_bm, k: pr.k };
        write(out, value, "out")
    })
}

/// Battery energy during a power-law ramp, `0 <= t <= tau_q`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_energy_quench_closed(
    params: *const QbSystemParams,
    protocol: *const QbProtocol,
    t: f64,
    out: *mut f64,
) -> QbStatus {
    guard(|| {
        let p = params_of(read(params, "params")?)?;
        let q = protocol_of(read(protocol, "protocol")?)?;
        write(out, analytic::energy_quench_closed(&p, &q, t)?, "out")
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_charger_energy_decoupled(params: *const QbSystemParams, t: f64, out: *mut f64) -> QbStatus {
    guard(|| {
        let p = params_of(read(params, "params")?)?;
        write(out, analytic::charger_energy_decoupled(&p, t)?, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_optimal_tauq_step(gamma: f64, out: *mut f64) -> QbStatus {
    guard(|| write(out, analytic::optimal_tauq_step(gamma)?, "out"))
}

/// `∫₁^∞ u^(-alpha) e^(ixu) du` as real and imaginary parts, `0 <= alpha < 1`.
///
/// # Safety
/// `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_gen_exp_integral(alpha: f64, x: f64, re: *mut f64, im: *mut f64) -> QbStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let v = specfun::gen_exp_integral(alpha, x)?;
        write(re, v.re, "re")?;
        write(im, v.im, "im")
    })
}

/// # Safety
/// `c` and `s` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_fresnel(z: f64, c: *mut f64, s: *mut f64) -> QbStatus {
    guard(|| {
        if c.is_null() || s.is_null() {
            return Err(null("c/s"));
        }
        let (cv, sv) = specfun::fresnel(z);
        write(c, cv, "c")?;
        write(s, sv, "s")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_lambert_w_minus1(x: f64, out: *mut f64) -> QbStatus {
    guard(|| write(out, specfun::lambert_w_branch_minus1(x)?, "out"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    fn message() -> String {
        unsafe { CStr::from_ptr(qb_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn errors_set_message_and_success_clears_it() {
        let mut w = 0.0;
        assert_eq!(unsafe { qb_lambert_w_minus1(1.0, &mut w) }, QbStatus::Domain);
        assert!(message().contains("W₋₁"));
        assert_eq!(unsafe { qb_lambert_w_minus1(-0.1, &mut w) }, QbStatus::Ok);
        assert_eq!(message(), "");
        assert!((w + 3.577_152_063_957_297).abs() < 1e-12);
    }

    #[test]
    fn null_out_pointer() {
        assert_eq!(unsafe { qb_theta_m(1.0, ptr::null_mut()) }, QbStatus::NullPointer);
    }

    #[test]
    fn panics_do_not_cross_the_boundary() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, QbStatus::Panic);
        assert!(message().contains("boom"));
    }

    #[test]
    fn version_is_terminated() {
        let v = unsafe { CStr::from_ptr(qb_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
