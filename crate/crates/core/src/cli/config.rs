//! Run configuration: defaults, JSON or CSV-header config files, and flags.
//!
//! Precedence is flags over file over defaults. The resolved configuration
//! is total and is written into every output as `# key=value` lines, which
//! [`load_file`] reads back.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use super::format::{exact, exact_list, num};
use crate::dynamics::default_horizon;
use crate::error::{Error, Result};
use crate::model::{QuenchProtocol, Ramp, SystemParams};
use crate::scaling::{self, default_fit_lower, log_grid, Field, Method};
use crate::tcfock;

pub const DEFAULT_OMEGA0: f64 = 1.0;
pub const DEFAULT_F: f64 = 0.01;
pub const DEFAULT_GF: f64 = 1.0;
pub const DEFAULT_GAMMA: f64 = 0.0;
pub const DEFAULT_R: f64 = 1.0;
pub const DEFAULT_TAUQ: f64 = 100.0;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_TC_TOL: f64 = 1e-12;
pub const DEFAULT_GRID_MAX: f64 = 1e4;
pub const DEFAULT_PER_DECADE: usize = 12;
pub const DEFAULT_S_LIST: &str = "4,8,16,32";
pub const JOBS_ENV: &str = "QBATTERY_JOBS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Sweep,
    Tc,
    Analytic,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Simulate => "simulate",
            CommandKind::Sweep => "sweep",
            CommandKind::Tc => "tc",
            CommandKind::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Quantity {
    #[value(name = "constant_peak")]
    ConstantPeak,
    #[value(name = "quench_energy")]
    QuenchEnergy,
    #[value(name = "theta_m")]
    ThetaM,
    #[value(name = "optimal_tauq")]
    OptimalTauq,
    #[value(name = "decoupled_energy")]
    DecoupledEnergy,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::ConstantPeak => "constant_peak",
            Quantity::QuenchEnergy => "quench_energy",
            Quantity::ThetaM => "theta_m",
            Quantity::OptimalTauq => "optimal_tauq",
            Quantity::DecoupledEnergy => "decoupled_energy",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, false)
            .map_err(|_| Error::Config(format!("unknown analytic quantity {s:?}")))
    }
}

/// A list given either as JSON numbers or as text (`a,b,c` or `lo:hi:n`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ListValue {
    Numbers(Vec<f64>),
    Number(f64),
    Text(String),
}

impl ListValue {
    fn text(&self) -> String {
        match self {
            ListValue::Numbers(v) => exact_list(v),
            ListValue::Number(x) => exact(*x),
            ListValue::Text(s) => s.trim().to_string(),
        }
    }
}

/// Every settable key, all optional. Used for config files and, filled from
/// the command line, for flag overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub command: Option<String>,
    pub omega0: Option<f64>,
    pub f: Option<f64>,
    pub gf: Option<f64>,
    pub gamma: Option<f64>,
    pub ramp: Option<String>,
    pub r: Option<f64>,
    pub step: Option<bool>,
    pub constant: Option<bool>,
    pub tauq: Option<f64>,
    pub horizon: Option<f64>,
    pub tol: Option<f64>,
    pub nout: Option<usize>,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub plot_field: Option<String>,
    pub jobs: Option<usize>,
    pub timestamp: Option<bool>,
    pub overlay_tauq: Option<ListValue>,
    pub grid: Option<ListValue>,
    pub fit: Option<String>,
    pub fit_window: Option<ListValue>,
    pub method: Option<String>,
    pub s_list: Option<ListValue>,
    pub ncutoff: Option<usize>,
    pub t: Option<f64>,
    pub quantity: Option<String>,
}

impl Settings {
    fn ramp_given(&self) -> bool {
        self.ramp.is_some() || self.r.is_some() || self.step == Some(true) || self.constant == Some(true)
    }

    /// `self` where set, `other` elsewhere. Ramp keys are taken as a group.
    pub fn over(self, other: Settings) -> Settings {
        let (ramp, r, step, constant) = if self.ramp_given() {
            (self.ramp, self.r, self.step, self.constant)
        } else {
            (other.ramp, other.r, other.step, other.constant)
        };
        Settings {
            command: self.command.or(other.command),
            omega0: self.omega0.or(other.omega0),
            f: self.f.or(other.f),
            gf: self.gf.or(other.gf),
            gamma: self.gamma.or(other.gamma),
            ramp,
            r,
            step,
            constant,
            tauq: self.tauq.or(other.tauq),
            horizon: self.horizon.or(other.horizon),
            tol: self.tol.or(other.tol),
            nout: self.nout.or(other.nout),
            out: self.out.or(other.out),
            plot: self.plot.or(other.plot),
            plot_field: self.plot_field.or(other.plot_field),
            jobs: self.jobs.or(other.jobs),
            timestamp: self.timestamp.or(other.timestamp),
            overlay_tauq: self.overlay_tauq.or(other.overlay_tauq),
            grid: self.grid.or(other.grid),
            fit: self.fit.or(other.fit),
            fit_window: self.fit_window.or(other.fit_window),
            method: self.method.or(other.method),
            s_list: self.s_list.or(other.s_list),
            ncutoff: self.ncutoff.or(other.ncutoff),
            t: self.t.or(other.t),
            quantity: self.quantity.or(other.quantity),
        }
    }
}

/// Read a flat JSON object, or the `# key=value` header of a CSV written by
/// this tool.
pub fn load_file(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_settings(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_settings(text: &str) -> Result<Settings> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON config: {e}")));
    }
    let mut obj = serde_json::Map::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else { break };
        let Some((key, value)) = rest.trim().split_once('=') else { continue };
        let key = key.trim();
        if key.starts_with("result_") || key.starts_with("meta_") || key == "timestamp" {
            continue;
        }
        let value = value.trim();
        let parsed = match serde_json::from_str::<Value>(value) {
            Ok(v @ (Value::Number(_) | Value::Bool(_))) => v,
            _ => Value::String(value.to_string()),
        };
        obj.insert(key.to_string(), parsed);
    }
    if obj.is_empty() {
        return Err(Error::Config("no JSON object or `# key=value` header found".into()));
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| Error::Config(format!("invalid config header: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: SystemParams,
    pub protocol: QuenchProtocol,
    pub horizon: f64,
    pub tol: f64,
    pub nout: usize,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub plot_field: String,
    pub jobs: usize,
    pub timestamp: bool,
    pub overlay_tauq: Vec<f64>,
    pub grid_spec: String,
    pub grid: Vec<f64>,
    pub fit: Option<Field>,
    pub fit_window: (f64, f64),
    pub method: Method,
    pub s_list: Vec<f64>,
    pub ncutoff: usize,
    pub quantity: Option<Quantity>,
    pub t: Option<f64>,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("--{name} must be > 0, got {v}")))
    }
}

fn parse_list(name: &str, text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("--{name}: cannot parse {s:?} as a number")))
        })
        .collect()
}

/// `lo:hi:per_decade` (log-spaced) or an explicit comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [lo, hi, per] = parts[..] else {
            return Err(Error::Config(format!("--grid {text:?}: expected lo:hi:per_decade")));
        };
        let lo: f64 = lo.parse().map_err(|_| Error::Config(format!("--grid: bad lower bound {lo:?}")))?;
        let hi: f64 = hi.parse().map_err(|_| Error::Config(format!("--grid: bad upper bound {hi:?}")))?;
        let per: usize = per.parse().map_err(|_| Error::Config(format!("--grid: bad points per decade {per:?}")))?;
        log_grid(lo, hi, per).map_err(config_err)?
    } else {
        parse_list("grid", text)?
    };
    if grid.is_empty() {
        return Err(Error::Config("--grid is empty".into()));
    }
    if grid.len() < 3 {
        return Err(Error::Config(format!("--grid needs at least 3 points, got {}", grid.len())));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("--grid must be positive and strictly ascending".into()));
    }
    Ok(grid)
}

fn resolve_ramp(s: &Settings) -> Result<Ramp> {
    let flags = [s.step == Some(true), s.constant == Some(true), s.r.is_some() && s.ramp.is_none()];
    if flags.iter().filter(|f| **f).count() > 1 {
        return Err(Error::Config("choose only one of --r, --step, --constant".into()));
    }
    let ramp = if s.step == Some(true) {
        Ramp::Step
    } else if s.constant == Some(true) {
        Ramp::Constant
    } else {
        match s.ramp.as_deref() {
            None | Some("power_law") => match s.r.unwrap_or(DEFAULT_R) {
                r if r == 0.0 => Ramp::Constant,
                r if r.is_finite() && r > 0.0 => Ramp::PowerLaw(r),
                r => return Err(Error::Config(format!("--r must be finite and >= 0, got {r}"))),
            },
            Some("constant") => Ramp::Constant,
            Some("step") => Ramp::Step,
            Some(other) => return Err(Error::Config(format!("unknown ramp {other:?}"))),
        }
    };
    Ok(ramp)
}

fn jobs_from_env() -> Result<usize> {
    match std::env::var(JOBS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{JOBS_ENV}={v:?} is not a worker count"))),
        _ => Ok(0),
    }
}

/// Default sweep grid: from ten constant-coupling peak times up to 1e4.
pub fn default_grid_spec(g_f: f64) -> String {
    format!("{}:{}:{}", num(default_fit_lower(g_f)), num(DEFAULT_GRID_MAX), DEFAULT_PER_DECADE)
}

pub fn resolve(command: CommandKind, s: Settings) -> Result<RunConfig> {
    let params = SystemParams::new(
        s.omega0.unwrap_or(DEFAULT_OMEGA0),
        s.f.unwrap_or(DEFAULT_F),
        s.gamma.unwrap_or(DEFAULT_GAMMA),
    )
    .map_err(config_err)?;
    let g_f = s.gf.unwrap_or(DEFAULT_GF);
    let tauq = positive("tauq", s.tauq.unwrap_or(DEFAULT_TAUQ))?;
    let protocol = QuenchProtocol::new(g_f, tauq, resolve_ramp(&s)?).map_err(config_err)?;

    let horizon = match s.horizon {
        Some(h) => positive("horizon", h)?,
        None => default_horizon(&protocol),
    };
    let default_tol = if command == CommandKind::Tc { DEFAULT_TC_TOL } else { DEFAULT_TOL };
    let tol = s.tol.unwrap_or(default_tol);
    if !(tol > 1e-14 && tol < 1e-3) {
        return Err(Error::Config(format!("--tol must lie in (1e-14, 1e-3), got {tol}")));
    }
    let nout = s.nout.unwrap_or_else(|| scaling::sweep_samples(g_f, horizon));
    if nout < 2 {
        return Err(Error::Config(format!("--nout must be >= 2, got {nout}")));
    }
    let jobs = match s.jobs {
        Some(j) => j,
        None => jobs_from_env()?,
    };

    let plot_field = match command {
        CommandKind::Sweep => {
            let f = s.plot_field.clone().unwrap_or_else(|| "p_bm".into());
            f.parse::<Field>()?;
            f
        }
        _ => {
            let f = s.plot_field.clone().unwrap_or_else(|| "e_b".into());
            if !matches!(f.as_str(), "e_a" | "e_b" | "p_b") {
                return Err(Error::Config(format!("--plot-field {f:?}: expected e_a, e_b or p_b")));
            }
            f
        }
    };

    let overlay_tauq = match &s.overlay_tauq {
        Some(v) => parse_list("overlay-tauq", &v.text())?,
        None => Vec::new(),
    };
    for &t in &overlay_tauq {
        positive("overlay-tauq", t)?;
    }

    let (grid_spec, grid) = if command == CommandKind::Sweep {
        let spec = s.grid.as_ref().map(ListValue::text).unwrap_or_else(|| default_grid_spec(g_f));
        let grid = parse_grid(&spec)?;
        (spec, grid)
    } else {
        (String::new(), Vec::new())
    };
    let fit = s.fit.as_deref().map(str::parse::<Field>).transpose()?;
    let fit_window = match &s.fit_window {
        Some(v) => {
            let w = parse_list("fit-window", &v.text().replace(':', ","))?;
            let [lo, hi] = w[..] else {
                return Err(Error::Config("--fit-window expects lo:hi".into()));
            };
            (lo, hi)
        }
        // Rounded like the header so a rerun from the header sees the same window.
        None => (
            num(default_fit_lower(g_f)).parse().unwrap_or(default_fit_lower(g_f)),
            grid.last().copied().unwrap_or(DEFAULT_GRID_MAX),
        ),
    };
    let method = s.method.as_deref().map(str::parse::<Method>).transpose()?.unwrap_or(Method::Ode);

    let s_list = parse_list("s-list", &s.s_list.as_ref().map(ListValue::text).unwrap_or_else(|| DEFAULT_S_LIST.into()))?;
    let mut ncutoff = s.ncutoff.unwrap_or(0);
    if command == CommandKind::Tc {
        if params.gamma() != 0.0 {
            return Err(Error::Unsupported(
                "tc: the Tavis-Cummings battery is simulated without dissipation; --gamma must be 0".into(),
            ));
        }
        if s_list.is_empty() {
            return Err(Error::Config("--s-list is empty".into()));
        }
        if ncutoff == 0 {
            ncutoff = tcfock::required_cutoff(&params, &protocol, horizon)?;
        } else if ncutoff < 2 {
            return Err(Error::Config(format!("--ncutoff must be >= 2, got {ncutoff}")));
        }
    }

    let quantity = s.quantity.as_deref().map(Quantity::parse).transpose()?;
    if command == CommandKind::Analytic && quantity.is_none() {
        return Err(Error::Config("analytic: missing quantity".into()));
    }

    Ok(RunConfig {
        command,
        params,
        protocol,
        horizon,
        tol,
        nout,
        out: s.out,
        plot: s.plot,
        plot_field,
        jobs,
        timestamp: s.timestamp.unwrap_or(false),
        overlay_tauq,
        grid_spec,
        grid,
        fit,
        fit_window,
        method,
        s_list,
        ncutoff,
        quantity,
        t: s.t,
    })
}

impl RunConfig {
    /// Key/value pairs sufficient to rerun the command. Output paths and the
    /// worker count are left out: they do not change the data.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v: Vec<(&'static str, String)> = vec![
            ("command", self.command.as_str().into()),
            ("omega0", exact(self.params.omega0())),
            ("f", exact(self.params.drive())),
            ("gf", exact(self.protocol.g_f())),
            ("gamma", exact(self.params.gamma())),
        ];
        match self.protocol.ramp() {
            Ramp::PowerLaw(r) => {
                v.push(("ramp", "power_law".into()));
                v.push(("r", exact(r)));
            }
            Ramp::Constant => v.push(("ramp", "constant".into())),
            Ramp::Step => v.push(("ramp", "step".into())),
        }
        v.push(("tauq", exact(self.protocol.tau_q())));
        match self.command {
            CommandKind::Simulate => {
                v.push(("horizon", exact(self.horizon)));
                v.push(("tol", exact(self.tol)));
                v.push(("nout", self.nout.to_string()));
                v.push(("plot_field", self.plot_field.clone()));
                if !self.overlay_tauq.is_empty() {
                    v.push(("overlay_tauq", exact_list(&self.overlay_tauq)));
                }
            }
            CommandKind::Sweep => {
                v.push(("grid", self.grid_spec.clone()));
                v.push(("method", self.method.as_str().into()));
                v.push(("tol", exact(self.tol)));
                if let Some(f) = self.fit {
                    v.push(("fit", f.as_str().into()));
                }
                v.push(("fit_window", format!("{}:{}", exact(self.fit_window.0), exact(self.fit_window.1))));
                v.push(("plot_field", self.plot_field.clone()));
            }
            CommandKind::Tc => {
                v.push(("horizon", exact(self.horizon)));
                v.push(("tol", exact(self.tol)));
                v.push(("nout", self.nout.to_string()));
                v.push(("s_list", exact_list(&self.s_list)));
                v.push(("ncutoff", self.ncutoff.to_string()));
            }
            CommandKind::Analytic => {
                if let Some(q) = self.quantity {
                    v.push(("quantity", q.as_str().into()));
                }
                if let Some(t) = self.t {
                    v.push(("t", exact(t)));
                }
            }
        }
        v
    }

    /// `#`-prefixed metadata block: tool version, resolved configuration and
    /// (if requested) a timestamp.
    pub fn header(&self) -> String {
        let mut s = format!("# qbattery {}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in self.pairs() {
            s.push_str(&format!("# {k}={v}\n"));
        }
        if self.command == CommandKind::Sweep {
            s.push_str(&format!("# meta_sweep_dt={}\n", num(scaling::SWEEP_DT)));
            s.push_str(&format!("# meta_sweep_min_samples={}\n", scaling::SWEEP_MIN_SAMPLES));
            s.push_str(&format!("# meta_retry_factor={}\n", num(scaling::RETRY_FACTOR)));
        }
        if self.timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            s.push_str(&format!("# timestamp={secs}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn defaults(cmd: CommandKind) -> RunConfig {
        resolve(cmd, Settings { quantity: Some("theta_m".into()), ..Default::default() }).unwrap()
    }

    #[test]
    fn defaults_are_total() {
        let c = defaults(CommandKind::Simulate);
        assert_eq!(c.params.omega0(), 1.0);
        assert_eq!(c.params.drive(), 0.01);
        assert_eq!(c.params.gamma(), 0.0);
        assert_eq!(c.protocol.g_f(), 1.0);
        assert_eq!(c.protocol.ramp(), Ramp::PowerLaw(1.0));
        assert_eq!(c.horizon, default_horizon(&c.protocol));
        assert!(c.nout >= 2001);
        let sw = defaults(CommandKind::Sweep);
        assert!((sw.grid[0] - 10.0 * PI).abs() < 1e-10);
        assert_eq!(*sw.grid.last().unwrap(), 1e4);
        assert!((sw.fit_window.0 - 10.0 * PI).abs() < 1e-10);
        assert_eq!(sw.fit_window.1, 1e4);
    }

    #[test]
    fn precedence_flags_file_defaults() {
        let file = parse_settings(r#"{"f": 0.5, "gf": 2.0, "step": true, "tauq": 7}"#).unwrap();
        let flags = Settings { f: Some(0.25), r: Some(2.0), ..Default::default() };
        let c = resolve(CommandKind::Simulate, flags.over(file.clone())).unwrap();
        assert_eq!(c.params.drive(), 0.25);
        assert_eq!(c.protocol.g_f(), 2.0);
        assert_eq!(c.protocol.tau_q(), 7.0);
        assert_eq!(c.protocol.ramp(), Ramp::PowerLaw(2.0));
        let c = resolve(CommandKind::Simulate, Settings::default().over(file)).unwrap();
        assert_eq!(c.protocol.ramp(), Ramp::Step);
    }

    #[test]
    fn header_round_trips() {
        let file = parse_settings(
            r#"{"gamma": 0.1, "step": true, "grid": "1:1000:5", "fit": "p_bm", "fit_window": [100, 1000], "method": "ode"}"#,
        )
        .unwrap();
        let c = resolve(CommandKind::Sweep, file).unwrap();
        let text = format!("{}tau_q,t_m,e_bm,p_bm,status\n1,2,3,4,ok\n", c.header());
        let back = resolve(CommandKind::Sweep, parse_settings(&text).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.header(), c.header());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("10:1000:1").unwrap(), vec![10.0, 100.0, 1000.0]);
        assert!(matches!(parse_grid(""), Err(Error::Config(_))));
        assert!(matches!(parse_grid("1,2"), Err(Error::Config(_))));
        assert!(matches!(parse_grid("3,2,1"), Err(Error::Config(_))));
        assert!(matches!(parse_grid("1:2"), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_inputs_are_usage_errors() {
        let bad = |s: &str| resolve(CommandKind::Simulate, parse_settings(s).unwrap()).unwrap_err();
        assert!(bad(r#"{"omega0": -1}"#).is_usage());
        assert!(bad(r#"{"tauq": 0}"#).is_usage());
        assert!(bad(r#"{"ramp": "zigzag"}"#).is_usage());
        assert!(bad(r#"{"tol": 1}"#).is_usage());
        assert!(parse_settings(r#"{"unknown": 1}"#).unwrap_err().is_usage());
        assert!(parse_settings("t,e\n1,2\n").unwrap_err().is_usage());
        let flags = Settings { step: Some(true), constant: Some(true), ..Default::default() };
        assert!(resolve(CommandKind::Simulate, flags).unwrap_err().is_usage());
    }

    #[test]
    fn tc_rejects_dissipation() {
        let s = Settings { gamma: Some(0.1), ..Default::default() };
        assert!(matches!(resolve(CommandKind::Tc, s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_exponent_is_constant() {
        let s = Settings { r: Some(0.0), ..Default::default() };
        assert_eq!(resolve(CommandKind::Simulate, s).unwrap().protocol.ramp(), Ramp::Constant);
    }
}
