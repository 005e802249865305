use serde::{Deserialize, Serialize};

use crate::error::{Result, VdpError};

/// Phase-space point of `ẍ + ω₀²x − ε(1 − x²)ẋ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalVdpState {
    pub x: f64,
    pub xdot: f64,
    pub omega0: f64,
    pub epsilon: f64,
}

impl ClassicalVdpState {
    pub fn new(x: f64, xdot: f64, omega0: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(omega0 > 0.0) {
            return Err(VdpError::InvalidParameter(format!(
                "need omega0 > 0 and epsilon > 0, got {omega0}, {epsilon}"
            )));
        }
        Ok(Self { x, xdot, omega0, epsilon })
    }

    /// `(ẋ² + ω₀²x²)/2`.
    pub fn energy(&self) -> f64 {
        0.5 * (self.xdot * self.xdot + self.omega0 * self.omega0 * self.x * self.x)
    }

    fn derivative(&self, x: f64, v: f64) -> (f64, f64) {
        (v, -self.omega0 * self.omega0 * x + self.epsilon * (1.0 - x * x) * v)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VdpTrajectory {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
}

impl VdpTrajectory {
    /// Largest `|x|` over the final `fraction` of the run.
    pub fn amplitude(&self, fraction: f64) -> f64 {
        let start = ((1.0 - fraction) * self.x.len() as f64) as usize;
        self.x[start..].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn energies(&self, omega0: f64) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.xdot)
            .map(|(x, v)| 0.5 * (v * v + omega0 * omega0 * x * x))
            .collect()
    }
}

/// Classical fourth-order Runge–Kutta integration of the van der Pol equation.
pub fn integrate_vdp_ode(state0: ClassicalVdpState, t_final: f64, dt: f64) -> Result<VdpTrajectory> {
    if !(dt > 0.0) || dt > 0.01 / state0.omega0 * (1.0 + 1e-12) {
        return Err(VdpError::InvalidParameter(format!(
            "dt = {dt} must lie in (0, 0.01/omega0]"
        )));
    }
    let steps = (t_final / dt).round() as usize;
    let mut out = VdpTrajectory {
        times: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        xdot: Vec::with_capacity(steps + 1),
    };
    let (mut x, mut v) = (state0.x, state0.xdot);
    out.times.push(0.0);
    out.x.push(x);
    out.xdot.push(v);
    for k in 1..=steps {
        let (k1x, k1v) = state0.derivative(x, v);
        let (k2x, k2v) = state0.derivative(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
        let (k3x, k3v) = state0.derivative(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
        let (k4x, k4v) = state0.derivative(x + dt * k3x, v + dt * k3v);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        out.times.push(k as f64 * dt);
        out.x.push(x);
        out.xdot.push(v);
    }
    Ok(out)
}
