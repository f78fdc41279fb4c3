use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The defining integral does not converge for the requested arguments.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// A user-supplied function returned a non-finite value.
    #[error("non-finite function value at x = {x}")]
    Evaluation { x: f64 },

    #[error("step size underflow at t = {t} (stiff or singular right-hand side)")]
    Stiffness { t: f64 },

    #[error("non-finite state at t = {t}")]
    Divergence { t: f64 },

    /// The request is valid but has no implementation (e.g. a closed form
    /// that only exists without dissipation).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A closed-form asymptotic result was requested outside its regime.
    #[error("outside closed-form regime: {0}")]
    Regime(String),

    #[error("sweep failed: {0}")]
    Sweep(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(
        "Fock cutoff {n_cutoff} too small: boundary leakage {leakage:.3e} exceeds {threshold:.1e}; \
         rerun with n_cutoff >= {suggested}"
    )]
    Cutoff {
        n_cutoff: usize,
        leakage: f64,
        threshold: f64,
        suggested: usize,
    },

    #[error("integrator error: {0}")]
    Integrator(String),

    /// Invalid configuration or command-line usage.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the
    /// computation itself.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
