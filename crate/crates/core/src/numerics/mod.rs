//! Native numeric kernels. They double as oracles for formula-level models.

mod crane;
mod fft;
mod optimize;
mod rk4;

use thiserror::Error;

pub use crane::{
    crane_derivative, optimal_fraction_closed_form, residual_amplitude_oracle, residual_energy,
    simulate_crane, ControlProfile, CraneState,
};
pub use fft::{convolve_direct, convolve_fft, fft, Direction};
pub use optimize::minimize_scalar;
pub use rk4::{rk4_integrate, Rk4Config};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("FFT length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("non-finite value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("objective is not finite at x = {0}")]
    NonFiniteObjective(f64),
}
