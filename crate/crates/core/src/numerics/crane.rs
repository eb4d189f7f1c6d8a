//! Cart-and-pendulum model driven by a four-segment control profile.
//!
//! State is `(y, v, theta, q)` with `y' = v`, `v' = eps * theta + u`,
//! `theta' = q`, `q' = -theta - u`.

use num_complex::Complex64;

use super::rk4::{rk4_integrate, Rk4Config};
use super::NumericsError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CraneState {
    pub y: f64,
    pub v: f64,
    pub theta: f64,
    pub q: f64,
}

impl CraneState {
    pub const REST: CraneState = CraneState {
        y: 0.0,
        v: 0.0,
        theta: 0.0,
        q: 0.0,
    };

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.y, self.v, self.theta, self.q]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        CraneState {
            y: x[0],
            v: x[1],
            theta: x[2],
            q: x[3],
        }
    }
}

/// Control `+u0, -f*u0, +f*u0, -u0` over four equal segments, then zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlProfile {
    pub segment: f64,
    pub u0: f64,
    pub fraction: f64,
    pub epsilon: f64,
}

impl Default for ControlProfile {
    fn default() -> Self {
        ControlProfile {
            segment: 2.0,
            u0: 1.0,
            fraction: 0.5,
            epsilon: 0.1,
        }
    }
}

impl ControlProfile {
    pub fn with_fraction(fraction: f64) -> Self {
        ControlProfile {
            fraction,
            ..ControlProfile::default()
        }
    }

    pub fn duration(&self) -> f64 {
        4.0 * self.segment
    }

    pub fn control(&self, t: f64) -> f64 {
        let s = self.segment;
        if t < s {
            self.u0
        } else if t < 2.0 * s {
            -self.fraction * self.u0
        } else if t < 3.0 * s {
            self.fraction * self.u0
        } else if t < 4.0 * s {
            -self.u0
        } else {
            0.0
        }
    }

    /// `(time, jump)` pairs of the piecewise-constant control.
    fn jumps(&self) -> [(f64, f64); 5] {
        let s = self.segment;
        let (u, f) = (self.u0, self.fraction);
        [
            (0.0, u),
            (s, -f * u - u),
            (2.0 * s, 2.0 * f * u),
            (3.0 * s, -u - f * u),
            (4.0 * s, u),
        ]
    }
}

pub fn crane_derivative(s: &CraneState, t: f64, p: &ControlProfile) -> CraneState {
    let u = p.control(t);
    CraneState {
        y: s.v,
        v: p.epsilon * s.theta + u,
        theta: s.q,
        q: -s.theta - u,
    }
}

/// Trajectory from rest over the profile's duration.
pub fn simulate_crane(p: &ControlProfile, dt: f64) -> Result<Vec<Vec<f64>>, NumericsError> {
    let steps = (p.duration() / dt).round() as usize;
    rk4_integrate(&CraneState::REST.to_vec(), 0.0, &Rk4Config { dt, steps }, |x, t| {
        crane_derivative(&CraneState::from_slice(x), t, p).to_vec()
    })
}

/// Swing energy `theta^2 + q^2` left at the end of the profile.
pub fn residual_energy(p: &ControlProfile, dt: f64) -> Result<f64, NumericsError> {
    let traj = simulate_crane(p, dt)?;
    let end = CraneState::from_slice(traj.last().expect("non-empty"));
    Ok(end.theta * end.theta + end.q * end.q)
}

/// Residual swing amplitude of the unit oscillator `theta'' + theta = -u`,
/// summed as phasors over the control jumps.
pub fn residual_amplitude_oracle(p: &ControlProfile) -> f64 {
    let t_end = p.duration();
    p.jumps()
        .iter()
        .map(|&(t, du)| du * Complex64::from_polar(1.0, -(t_end - t)))
        .sum::<Complex64>()
        .norm()
}

/// Fraction that cancels the residual swing for two-unit segments.
pub fn optimal_fraction_closed_form() -> f64 {
    (2f64.cos() - 4f64.cos()) / (1.0 - 2f64.cos())
}
