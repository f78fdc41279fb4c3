//! Command-line interface: `qbattery simulate|sweep|tc|analytic`.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage or configuration
//! error.

mod commands;
pub mod config;
pub mod format;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use config::{CommandKind, ListValue, Quantity, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "qbattery",
    version,
    about = "Charging dynamics and power scaling of a quench-charged bosonic quantum battery"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate the charging dynamics and write the time trace.
    Simulate(SimulateArgs),
    /// Sweep the quench time and fit power laws to the peak energy and power.
    Sweep(SweepArgs),
    /// Compare the Tavis-Cummings battery with the bosonic model.
    Tc(TcArgs),
    /// Evaluate a closed-form result.
    Analytic(AnalyticArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Mode frequency ω₀.
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Drive amplitude F.
    #[arg(long = "f")]
    pub f: Option<f64>,
    /// Final coupling g_f.
    #[arg(long)]
    pub gf: Option<f64>,
    /// Charger dissipation rate γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Power-law ramp exponent (0 means constant coupling).
    #[arg(long)]
    pub r: Option<f64>,
    /// Step ramp: coupling off until τ_Q, then g_f.
    #[arg(long, conflicts_with_all = ["r", "constant"])]
    pub step: bool,
    /// Constant coupling g_f from t = 0.
    #[arg(long, conflicts_with = "r")]
    pub constant: bool,
    /// Quench duration τ_Q.
    #[arg(long)]
    pub tauq: Option<f64>,
    /// Integration horizon (default: τ_Q plus three coupling periods).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of output samples.
    #[arg(long)]
    pub nout: Option<usize>,
    /// Output CSV path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write an SVG plot to this path.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// JSON config, or a CSV written by this tool.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores). Defaults to $QBATTERY_JOBS.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Add a `# timestamp=` line to output headers.
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Plotted column: e_a, e_b or p_b.
    #[arg(long)]
    pub plot_field: Option<String>,
    /// Extra quench times drawn in the plot, e.g. 20,50.
    #[arg(long)]
    pub overlay_tauq: Option<String>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `lo:hi:points_per_decade` or a comma list of quench times.
    #[arg(long)]
    pub grid: Option<String>,
    /// Fit a power law to e_bm or p_bm.
    #[arg(long, num_args = 0..=1, default_missing_value = "p_bm")]
    pub fit: Option<String>,
    /// Fit window `lo:hi` in τ_Q.
    #[arg(long)]
    pub fit_window: Option<String>,
    /// ode or closed_form.
    #[arg(long)]
    pub method: Option<String>,
    /// Plotted column: e_bm or p_bm.
    #[arg(long)]
    pub plot_field: Option<String>,
}

#[derive(Args, Debug)]
pub struct TcArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma list of collective spins s.
    #[arg(long)]
    pub s_list: Option<String>,
    /// Charger Fock cutoff (default: estimated from the bosonic model).
    #[arg(long)]
    pub ncutoff: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AnalyticArgs {
    /// Quantity to evaluate.
    #[arg(value_enum)]
    pub quantity: Quantity,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Time at which to evaluate energies.
    #[arg(long)]
    pub t: Option<f64>,
}

impl CommonArgs {
    fn settings(&self) -> Settings {
        Settings {
            omega0: self.omega0,
            f: self.f,
            gf: self.gf,
            gamma: self.gamma,
            r: self.r,
            step: self.step.then_some(true),
            constant: self.constant.then_some(true),
            tauq: self.tauq,
            horizon: self.horizon,
            tol: self.tol,
            nout: self.nout,
            out: self.out.clone(),
            plot: self.plot.clone(),
            jobs: self.jobs,
            timestamp: self.timestamp.then_some(true),
            ..Default::default()
        }
    }
}

fn text(v: &Option<String>) -> Option<ListValue> {
    v.as_ref().map(|s| ListValue::Text(s.clone()))
}

fn resolve(kind: CommandKind, common: &CommonArgs, flags: Settings) -> Result<config::RunConfig> {
    let file = match &common.config {
        Some(path) => config::load_file(path)?,
        None => Settings::default(),
    };
    config::resolve(kind, flags.over(file))
}

/// Exit code for an error: usage for bad input or unsupported requests,
/// failure otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_usage() || matches!(e, Error::Unsupported(_)) {
        EXIT_USAGE
    } else {
        EXIT_FAILURE
    }
}

/// Execute a parsed command, writing reports to `out`.
pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate(a) => {
            let flags = Settings {
                plot_field: a.plot_field.clone(),
                overlay_tauq: text(&a.overlay_tauq),
                ..a.common.settings()
            };
            commands::simulate(&resolve(CommandKind::Simulate, &a.common, flags)?, out)
        }
        Command::Sweep(a) => {
            let flags = Settings {
                grid: text(&a.grid),
                fit: a.fit.clone(),
                fit_window: text(&a.fit_window),
                method: a.method.clone(),
                plot_field: a.plot_field.clone(),
                ..a.common.settings()
            };
            commands::sweep(&resolve(CommandKind::Sweep, &a.common, flags)?, out)
        }
        Command::Tc(a) => {
            let flags = Settings { s_list: text(&a.s_list), ncutoff: a.ncutoff, ..a.common.settings() };
            commands::tc(&resolve(CommandKind::Tc, &a.common, flags)?, out)
        }
        Command::Analytic(a) => {
            let flags = Settings { t: a.t, quantity: Some(a.quantity.as_str().into()), ..a.common.settings() };
            commands::analytic(&resolve(CommandKind::Analytic, &a.common, flags)?, out)
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli.command, &mut lock) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("qbattery: {e}");
            exit_code(&e)
        }
    }
}
