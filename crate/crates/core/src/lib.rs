//! Simulation and analysis of a slowly quenched, coherently driven bosonic
//! quantum battery.
//!
//! A driven charger mode `a` is coupled to a battery mode `b` through a
//! coupling `g(t)` that ramps from zero to `g_f` over a quench time `τ_Q`.
//! The crate integrates the first-moment dynamics, provides the closed-form
//! results available without dissipation, sweeps `τ_Q` to extract
//! power-law scaling of the peak energy and power, and cross-checks the
//! bosonic model against a driven Tavis-Cummings battery at finite spin.

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod ode;
pub mod scaling;
pub mod specfun;
pub mod tcfock;

pub use error::{Error, Result};
pub use model::{QuenchProtocol, Ramp, SystemParams};
