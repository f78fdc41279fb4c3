//! Physical parameters and quench protocols.
//!
//! Natural units with ħ = 1 throughout: energies are measured in units of the
//! bare mode frequency ω₀ and times in units of 1/ω₀.

use crate::error::{Error, Result};

/// Mode frequency, drive amplitude and charger loss rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    omega0: f64,
    drive: f64,
    gamma: f64,
}

impl SystemParams {
    pub fn new(omega0: f64, drive: f64, gamma: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::domain(format!("omega0 must be > 0, got {omega0}")));
        }
        if !(drive.is_finite() && drive >= 0.0) {
            return Err(Error::domain(format!("drive amplitude F must be >= 0, got {drive}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::domain(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Self { omega0, drive, gamma })
    }

    /// Lossless system with `gamma = 0`.
    pub fn closed(omega0: f64, drive: f64) -> Result<Self> {
        Self::new(omega0, drive, 0.0)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Drive amplitude F.
    pub fn drive(&self) -> f64 {
        self.drive
    }

    /// Charger dissipation rate γ.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_drive(&self, drive: f64) -> Result<Self> {
        Self::new(self.omega0, drive, self.gamma)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.omega0, self.drive, gamma)
    }
}

/// Shape of the coupling ramp on `[0, tau_q]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ramp {
    /// `g_f (t / tau_q)^r` with `r > 0`.
    PowerLaw(f64),
    /// Coupling switched on at full strength at `t = 0` (`r = 0`).
    Constant,
    /// Coupling switched on at full strength at `t = tau_q` (`r → ∞`).
    Step,
}

impl Ramp {
    /// Ramp exponent `r`, or `None` for the step limit.
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Ramp::PowerLaw(r) => Some(r),
            Ramp::Constant => Some(0.0),
            Ramp::Step => None,
        }
    }
}

/// Coupling protocol `g(t)`: a ramp up to `g_f` over `[0, tau_q]`, held at
/// `g_f` afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchProtocol {
    g_f: f64,
    tau_q: f64,
    ramp: Ramp,
}

impl QuenchProtocol {
    /// `g_f = 0` is accepted and describes a charger that never couples to
    /// the battery.
    pub fn new(g_f: f64, tau_q: f64, ramp: Ramp) -> Result<Self> {
        if !(g_f.is_finite() && g_f >= 0.0) {
            return Err(Error::domain(format!("g_f must be >= 0, got {g_f}")));
        }
        if !(tau_q.is_finite() && tau_q > 0.0) {
            return Err(Error::domain(format!("tau_q must be > 0, got {tau_q}")));
        }
        if let Ramp::PowerLaw(r) = ramp {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::domain(format!(
                    "power-law ramp exponent must be finite and > 0, got {r}"
                )));
            }
        }
        Ok(Self { g_f, tau_q, ramp })
    }

    pub fn power_law(g_f: f64, tau_q: f64, r: f64) -> Result<Self> {
        Self::new(g_f, tau_q, Ramp::PowerLaw(r))
    }

    pub fn constant(g_f: f64, tau_q: f64) -> Result<Self> {
        Self::new(g_f, tau_q, Ramp::Constant)
    }

    pub fn step(g_f: f64, tau_q: f64) -> Result<Self> {
        Self::new(g_f, tau_q, Ramp::Step)
    }

    pub fn g_f(&self) -> f64 {
        self.g_f
    }

    pub fn tau_q(&self) -> f64 {
        self.tau_q
    }

    pub fn ramp(&self) -> Ramp {
        self.ramp
    }

    pub fn with_tau_q(&self, tau_q: f64) -> Result<Self> {
        Self::new(self.g_f, tau_q, self.ramp)
    }

    /// Coupling strength `g(t)`.
    pub fn coupling_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("time must be >= 0, got {t}")));
        }
        Ok(self.coupling_unchecked(t))
    }

    pub(crate) fn coupling_unchecked(&self, t: f64) -> f64 {
        if t >= self.tau_q {
            return self.g_f;
        }
        self.ramp_coupling(t)
    }

    /// Coupling on the open ramp interval `[0, tau_q)`. Unlike
    /// [`coupling_at`](Self::coupling_at) this never jumps to `g_f` at
    /// `t = tau_q`, so integrators can evaluate it at the right end of the
    /// ramp piece.
    pub(crate) fn ramp_coupling(&self, t: f64) -> f64 {
        match self.ramp {
            Ramp::Constant => self.g_f,
            Ramp::Step => 0.0,
            Ramp::PowerLaw(r) => {
                let x = (t / self.tau_q).clamp(0.0, 1.0);
                self.g_f * x.powf(r)
            }
        }
    }

    /// Scaling exponent `alpha = r / (r + 1)`; 0 for constant coupling and 1
    /// for the step limit.
    pub fn alpha(&self) -> f64 {
        match self.ramp {
            Ramp::PowerLaw(r) => r / (r + 1.0),
            Ramp::Constant => 0.0,
            Ramp::Step => 1.0,
        }
    }

    /// Ramp rate `k = g_f / tau_q^r`.
    pub fn k(&self) -> Result<f64> {
        match self.ramp {
            Ramp::PowerLaw(r) => Ok(self.g_f / self.tau_q.powf(r)),
            Ramp::Constant => Ok(self.g_f),
            Ramp::Step => Err(Error::Unsupported("ramp rate k is undefined for a step ramp".into())),
        }
    }

    /// Accumulated phase `theta(t) = k t^(1+r)`, defined on the ramp only.
    pub fn theta(&self, t: f64) -> Result<f64> {
        let r = match self.ramp {
            Ramp::PowerLaw(r) => r,
            Ramp::Constant => 0.0,
            Ramp::Step => {
                return Err(Error::Unsupported("theta(t) is undefined for a step ramp".into()))
            }
        };
        if !(t >= 0.0) {
            return Err(Error::domain(format!("time must be >= 0, got {t}")));
        }
        if t > self.tau_q {
            return Err(Error::domain(format!(
                "theta(t) is only defined on the ramp, t = {t} > tau_q = {}",
                self.tau_q
            )));
        }
        if t == self.tau_q {
            return Ok(self.g_f * self.tau_q);
        }
        Ok(self.k()? * t.powf(1.0 + r))
    }
}
