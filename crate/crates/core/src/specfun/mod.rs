//! Special functions behind the closed-form charging results.
//!
//! Everything here is real-argument or restricted to the imaginary axis; no
//! general complex-plane implementations.

mod expint;
mod fresnel;
mod gamma;
mod lambert;
mod optimize;

pub use expint::gen_exp_integral;
pub use fresnel::fresnel;
pub use gamma::gamma;
pub use lambert::lambert_w_branch_minus1;
pub use optimize::{maximize_scalar, maximize_scalar_with, Maximum};

/// Complex intermediate values.
pub type ComplexValue = num_complex::Complex64;
