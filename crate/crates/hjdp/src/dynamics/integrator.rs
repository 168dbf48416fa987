//! Single integrator `dx/dt = u`, the 1D test and oracle system.

use super::{DynamicsModel, OptMode};

/// 1D integrator with `u` in `[-u_max, u_max]` and no disturbance.
#[derive(Debug, Clone)]
pub struct Integrator1d {
    u_max: f64,
    control_mode: OptMode,
}

impl Integrator1d {
    pub fn new(u_max: f64, control_mode: OptMode) -> Self {
        Self {
            u_max,
            control_mode,
        }
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }
}

impl DynamicsModel for Integrator1d {
    fn state_dims(&self) -> usize {
        1
    }

    fn control_dims(&self) -> usize {
        1
    }

    fn disturbance_dims(&self) -> usize {
        0
    }

    fn control_mode(&self) -> OptMode {
        self.control_mode
    }

    fn disturbance_mode(&self) -> OptMode {
        OptMode::Min
    }

    fn opt_ctrl(&self, _x: &[f64], p: &[f64], u: &mut [f64]) {
        u[0] = self.control_mode.pick(p[0], -self.u_max, self.u_max);
    }

    fn opt_dstb(&self, _x: &[f64], _p: &[f64], _d: &mut [f64]) {}

    fn rate(&self, _x: &[f64], u: &[f64], _d: &[f64], out: &mut [f64]) {
        out[0] = u[0];
    }

    fn partial_bound(&self, _dim: usize, _x: &[f64], _min_d: &[f64], _max_d: &[f64]) -> f64 {
        self.u_max
    }
}
