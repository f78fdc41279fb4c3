use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::{Quantity, RunConfig};
use super::format::num;
use super::svg::{self, Plot, Series, Style};
use crate::analytic;
use crate::dynamics::{self, EnergyTrace, Trajectory};
use crate::error::{Error, Result};
use crate::model::Ramp;
use crate::scaling::{self, Field, SweepOptions, SweepRow};
use crate::tcfock::{self, TcConfig};

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, text: &str, out: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(path) => write_file(path, text),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn say(out: &mut dyn Write, key: &str, value: &str) -> Result<()> {
    writeln!(out, "{key}={value}").map_err(Error::from)
}

fn result_line(s: &mut String, key: &str, value: &str) {
    let _ = writeln!(s, "# result_{key}={value}");
}

fn ramp_label(cfg: &RunConfig) -> String {
    match cfg.protocol.ramp() {
        Ramp::PowerLaw(r) => format!("r={}", num(r)),
        Ramp::Constant => "constant".into(),
        Ramp::Step => "step".into(),
    }
}

fn field_series(trace: &EnergyTrace, field: &str) -> Vec<(f64, f64)> {
    let ys = match field {
        "e_a" => &trace.e_a,
        "p_b" => &trace.p_b,
        _ => &trace.e_b,
    };
    trace.times.iter().copied().zip(ys.iter().copied()).collect()
}

pub(super) fn simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let traj = dynamics::integrate_moments(&cfg.params, &cfg.protocol, cfg.horizon, cfg.nout, cfg.tol)?;
    let trace = dynamics::energy_trace(&traj);

    let mut text = cfg.header();
    match trace.peak {
        Some(pk) => {
            result_line(&mut text, "t_m", &num(pk.t_m));
            result_line(&mut text, "e_bm", &num(pk.e_bm));
            result_line(&mut text, "p_bm", &num(pk.p_bm));
        }
        None => result_line(&mut text, "peak", "none"),
    }
    text.push_str("t,re_a,im_a,re_b,im_b,E_A,E_B,P_B\n");
    write_trace_rows(&mut text, &traj, &trace);
    emit(cfg, &text, out)?;

    if let Some(path) = &cfg.plot {
        let mut series = vec![Series {
            label: format!("tau_q={}", num(cfg.protocol.tau_q())),
            points: field_series(&trace, &cfg.plot_field),
            style: Style::Line,
        }];
        for &tau in &cfg.overlay_tauq {
            let proto = cfg.protocol.with_tau_q(tau)?;
            let t = dynamics::integrate_moments(&cfg.params, &proto, cfg.horizon, cfg.nout, cfg.tol)?;
            series.push(Series {
                label: format!("tau_q={}", num(tau)),
                points: field_series(&dynamics::energy_trace(&t), &cfg.plot_field),
                style: Style::Line,
            });
        }
        let plot = Plot {
            title: format!("{} vs t ({}, gamma={})", cfg.plot_field, ramp_label(cfg), num(cfg.params.gamma())),
            x_label: "t".into(),
            y_label: cfg.plot_field.clone(),
            series,
            ..Default::default()
        };
        write_file(path, &svg::render(&plot))?;
    }

    if cfg.out.is_some() {
        match trace.peak {
            Some(pk) => {
                say(out, "t_m", &num(pk.t_m))?;
                say(out, "e_bm", &num(pk.e_bm))?;
                say(out, "p_bm", &num(pk.p_bm))?;
            }
            None => say(out, "peak", "none")?,
        }
    }
    Ok(())
}

fn write_trace_rows(text: &mut String, traj: &Trajectory, trace: &EnergyTrace) {
    for i in 0..traj.len() {
        let (a, b) = (traj.a_amp()[i], traj.b_amp()[i]);
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            num(trace.times[i]),
            num(a.re),
            num(a.im),
            num(b.re),
            num(b.im),
            num(trace.e_a[i]),
            num(trace.e_b[i]),
            num(trace.p_b[i])
        );
    }
}

pub(super) fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let opts = SweepOptions { method: cfg.method, tol: cfg.tol, jobs: cfg.jobs };
    let rows = scaling::sweep_tauq(&cfg.params, &cfg.protocol, &cfg.grid, &opts)?;
    for r in rows.iter().filter(|r| !r.is_ok()) {
        eprintln!(
            "qbattery: tau_q={} {}: {}",
            num(r.tau_q),
            r.status,
            r.message.as_deref().unwrap_or("")
        );
    }
    let fit = cfg.fit.map(|field| scaling::fit_power_law(&rows, field, cfg.fit_window)).transpose()?;
    let rolloff = scaling::detect_rolloff(&rows);
    let failed = rows.iter().filter(|r| !r.is_ok()).count();

    let mut results: Vec<(&str, String)> = Vec::new();
    if let Some(f) = &fit {
        results.push(("fit_field", f.field.as_str().into()));
        results.push(("slope", num(f.slope)));
        results.push(("slope_stderr", num(f.slope_stderr)));
        results.push(("intercept", num(f.intercept)));
        results.push(("r_squared", num(f.r_squared)));
        results.push(("n_points", f.n_points.to_string()));
    }
    results.push(("rolloff_tau_q", rolloff.map(num).unwrap_or_else(|| "none".into())));
    results.push(("failed_rows", failed.to_string()));

    let mut text = cfg.header();
    for (k, v) in &results {
        result_line(&mut text, k, v);
    }
    text.push_str("tau_q,t_m,e_bm,p_bm,status\n");
    for r in &rows {
        let _ = writeln!(text, "{},{},{},{},{}", num(r.tau_q), num(r.t_m), num(r.e_bm), num(r.p_bm), r.status);
    }
    emit(cfg, &text, out)?;

    if let Some(path) = &cfg.plot {
        let field: Field = cfg.plot_field.parse()?;
        write_file(path, &svg::render(&sweep_plot(cfg, &rows, field, fit.as_ref(), rolloff)))?;
    }
    if cfg.out.is_some() {
        for (k, v) in &results {
            say(out, k, v)?;
        }
    }
    Ok(())
}

fn sweep_plot(
    cfg: &RunConfig,
    rows: &[SweepRow],
    field: Field,
    fit: Option<&scaling::ScalingFit>,
    rolloff: Option<f64>,
) -> Plot {
    let value = |r: &SweepRow| match field {
        Field::EBm => r.e_bm,
        Field::PBm => r.p_bm,
    };
    let mut series = vec![Series {
        label: field.as_str().into(),
        points: rows.iter().filter(|r| r.is_ok()).map(|r| (r.tau_q, value(r))).collect(),
        style: Style::Markers,
    }];
    if let Some(f) = fit.filter(|f| f.field == field) {
        let (lo, hi) = f.window;
        let pts = (0..=40)
            .map(|i| lo * (hi / lo).powf(i as f64 / 40.0))
            .map(|t| (t, f.predict(t)))
            .collect();
        series.push(Series { label: format!("fit slope {}", num(f.slope)), points: pts, style: Style::Dashed });
    }
    Plot {
        title: format!("{} vs tau_q ({}, gamma={})", field.as_str(), ramp_label(cfg), num(cfg.params.gamma())),
        x_label: "tau_q".into(),
        y_label: field.as_str().into(),
        log_x: true,
        log_y: true,
        series,
        vlines: rolloff.map(|t| vec![(t, format!("tau_q*={}", num(t)))]).unwrap_or_default(),
    }
}

fn trace_path(base: &Path, s: f64) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("tc");
    base.with_file_name(format!("{stem}_s{}.csv", num(s)))
}

pub(super) fn tc(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let base = TcConfig::new(cfg.s_list[0], cfg.ncutoff, cfg.params, cfg.protocol)?;
    let points = tcfock::hp_convergence(&base, &cfg.s_list, cfg.horizon, cfg.nout, cfg.tol, cfg.jobs)?;
    let conv_path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("tc_convergence.csv"));
    let header = cfg.header();

    for p in &points {
        let mut text = header.clone();
        result_line(&mut text, "s", &num(p.s));
        result_line(&mut text, "error", &num(p.error));
        result_line(&mut text, "max_norm_drift", &num(p.trace.max_norm_drift()));
        result_line(&mut text, "max_leakage", &num(p.trace.max_leakage()));
        text.push_str("t,e_a,e_b,norm,leakage\n");
        let tr = &p.trace;
        for i in 0..tr.trace.times.len() {
            let _ = writeln!(
                text,
                "{},{},{},{},{}",
                num(tr.trace.times[i]),
                num(tr.trace.e_a[i]),
                num(tr.trace.e_b[i]),
                num(tr.norm[i]),
                num(tr.leakage[i])
            );
        }
        write_file(&trace_path(&conv_path, p.s), &text)?;
    }

    let mut text = header;
    text.push_str("s,error\n");
    for p in &points {
        let _ = writeln!(text, "{},{}", num(p.s), num(p.error));
    }
    write_file(&conv_path, &text)?;

    if let Some(path) = &cfg.plot {
        let bos = dynamics::integrate_moments(&cfg.params, &cfg.protocol, cfg.horizon, cfg.nout, cfg.tol.max(1e-13))?;
        let bos = dynamics::energy_trace(&bos);
        let mut series: Vec<Series> = points
            .iter()
            .map(|p| Series {
                label: format!("TC s={}", num(p.s)),
                points: field_series(&p.trace.trace, "e_b"),
                style: Style::Line,
            })
            .collect();
        series.push(Series { label: "bosonic".into(), points: field_series(&bos, "e_b"), style: Style::Dashed });
        let plot = Plot {
            title: format!("Tavis-Cummings vs bosonic battery ({})", ramp_label(cfg)),
            x_label: "t".into(),
            y_label: "e_b".into(),
            series,
            ..Default::default()
        };
        write_file(path, &svg::render(&plot))?;
    }

    say(out, "ncutoff", &cfg.ncutoff.to_string())?;
    for p in &points {
        say(out, &format!("error_s{}", num(p.s)), &num(p.error))?;
    }
    Ok(())
}

pub(super) fn analytic(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let need_t = || cfg.t.ok_or_else(|| Error::Config("this quantity needs --t".into()));
    let quantity = cfg.quantity.ok_or_else(|| Error::Config("missing quantity".into()))?;
    let value = match quantity {
        Quantity::ConstantPeak => {
            let g = cfg.protocol.g_f();
            analytic::energy_constant_coupling(&cfg.params, g, PI / g)?
        }
        Quantity::QuenchEnergy => analytic::energy_quench_closed(&cfg.params, &cfg.protocol, need_t()?)?,
        Quantity::ThetaM => match cfg.protocol.ramp() {
            Ramp::PowerLaw(r) => analytic::theta_m(r)?,
            Ramp::Constant => analytic::theta_m(0.0)?,
            Ramp::Step => return Err(Error::Unsupported("theta_m is defined for power-law ramps".into())),
        },
        Quantity::OptimalTauq => analytic::optimal_tauq_step(cfg.params.gamma())?,
        Quantity::DecoupledEnergy => analytic::charger_energy_decoupled(&cfg.params, need_t()?)?,
    };
    say(out, quantity.as_str(), &num(value))
}
