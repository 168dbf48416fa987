//! 6D tracking-error dynamics of an underwater vehicle following a planner
//! under water-flow disturbances.
//!
//! State: `(x_a, z_a, u_r, w_r, x, z)` — planner-relative position, velocity
//! relative to the flow, and absolute position. Controls are the thrusts
//! `(T_A, T_B)`; the planner inputs `(b_x, b_z)` and flow disturbances
//! `(d_x, d_z, d_u, d_w)` together form the disturbance vector.
//!
//! The flow velocity and acceleration fields are configurable constants; the
//! general space- and time-varying case is a straightforward extension.

use super::{DynamicsModel, Interval, OptMode};

/// Physical and bound parameters of the tracker.
#[derive(Debug, Clone)]
pub struct UnderwaterParams {
    /// Vehicle mass.
    pub mass: f64,
    /// Displaced-water (buoyant) mass.
    pub mass_displaced: f64,
    /// Added mass in surge (subtracted from `mass` in the surge inertia).
    pub added_mass_x: f64,
    /// Added mass in heave.
    pub added_mass_z: f64,
    /// Linear drag in surge.
    pub drag_x: f64,
    /// Quadratic drag in surge.
    pub drag_xx: f64,
    /// Linear drag in heave.
    pub drag_z: f64,
    /// Quadratic drag in heave.
    pub drag_zz: f64,
    pub gravity: f64,
    /// Flow velocity components, taken constant over a solve.
    pub flow_vel_x: f64,
    pub flow_vel_z: f64,
    /// Flow acceleration components, taken constant over a solve.
    pub flow_acc_x: f64,
    pub flow_acc_z: f64,
    /// Thrust ranges.
    pub thrust_x: Interval,
    pub thrust_z: Interval,
    /// Planner input ranges.
    pub planner_x: Interval,
    pub planner_z: Interval,
    /// Disturbance ranges.
    pub dist_x: Interval,
    pub dist_z: Interval,
    pub dist_u: Interval,
    pub dist_w: Interval,
}

#[derive(Debug, Clone)]
pub struct UnderwaterTracker6d {
    p: UnderwaterParams,
    /// 1 / (m - X_udot)
    inv_inertia_x: f64,
    /// 1 / (m - Z_wdot)
    inv_inertia_z: f64,
    control_mode: OptMode,
    disturbance_mode: OptMode,
}

impl UnderwaterTracker6d {
    pub fn new(p: UnderwaterParams) -> Self {
        let inv_inertia_x = 1.0 / (p.mass - p.added_mass_x);
        let inv_inertia_z = 1.0 / (p.mass - p.added_mass_z);
        Self {
            p,
            inv_inertia_x,
            inv_inertia_z,
            control_mode: OptMode::Max,
            disturbance_mode: OptMode::Min,
        }
    }

    pub fn with_modes(mut self, control: OptMode, disturbance: OptMode) -> Self {
        self.control_mode = control;
        self.disturbance_mode = disturbance;
        self
    }

    /// Thrust-free part of the surge acceleration.
    #[inline]
    fn surge_drift(&self, u_r: f64) -> f64 {
        (self.p.mass_displaced - self.p.mass) * self.p.flow_acc_x
            - (self.p.drag_x + self.p.drag_xx * u_r.abs()) * u_r
    }

    /// Thrust-free part of the heave acceleration (includes net buoyancy).
    #[inline]
    fn heave_drift(&self, w_r: f64) -> f64 {
        (self.p.mass_displaced - self.p.mass) * self.p.flow_acc_z
            + self.p.gravity * (self.p.mass - self.p.mass_displaced)
            - (self.p.drag_z + self.p.drag_zz * w_r.abs()) * w_r
    }
}

impl DynamicsModel for UnderwaterTracker6d {
    fn state_dims(&self) -> usize {
        6
    }

    fn control_dims(&self) -> usize {
        2
    }

    fn disturbance_dims(&self) -> usize {
        6
    }

    fn control_mode(&self) -> OptMode {
        self.control_mode
    }

    fn disturbance_mode(&self) -> OptMode {
        self.disturbance_mode
    }

    fn opt_ctrl(&self, _x: &[f64], p: &[f64], u: &mut [f64]) {
        let pp = &self.p;
        u[0] = self
            .control_mode
            .pick(p[2] * self.inv_inertia_x, pp.thrust_x.lo, pp.thrust_x.hi);
        u[1] = self
            .control_mode
            .pick(p[3] * self.inv_inertia_z, pp.thrust_z.lo, pp.thrust_z.hi);
    }

    fn opt_dstb(&self, _x: &[f64], p: &[f64], d: &mut [f64]) {
        let pp = &self.p;
        let m = self.disturbance_mode;
        d[0] = m.pick(-p[0], pp.planner_x.lo, pp.planner_x.hi);
        d[1] = m.pick(-p[1], pp.planner_z.lo, pp.planner_z.hi);
        d[2] = m.pick(p[0] + p[4], pp.dist_x.lo, pp.dist_x.hi);
        d[3] = m.pick(p[1] + p[5], pp.dist_z.lo, pp.dist_z.hi);
        d[4] = m.pick(p[2], pp.dist_u.lo, pp.dist_u.hi);
        d[5] = m.pick(p[3], pp.dist_w.lo, pp.dist_w.hi);
    }

    fn rate(&self, x: &[f64], u: &[f64], d: &[f64], out: &mut [f64]) {
        let pp = &self.p;
        let (u_r, w_r) = (x[2], x[3]);
        let (b_x, b_z, d_x, d_z, d_u, d_w) = (d[0], d[1], d[2], d[3], d[4], d[5]);
        out[0] = u_r + pp.flow_vel_x + d_x - b_x;
        out[1] = w_r + pp.flow_vel_z + d_z - b_z;
        out[2] = self.inv_inertia_x * (self.surge_drift(u_r) + u[0]) + d_u;
        out[3] = self.inv_inertia_z * (self.heave_drift(w_r) + u[1]) + d_w;
        out[4] = u_r + pp.flow_vel_x + d_x;
        out[5] = w_r + pp.flow_vel_z + d_z;
    }

    fn partial_bound(&self, dim: usize, x: &[f64], _min_d: &[f64], _max_d: &[f64]) -> f64 {
        let pp = &self.p;
        let span = match dim {
            0 => (pp.dist_x - pp.planner_x).shift(x[2] + pp.flow_vel_x),
            1 => (pp.dist_z - pp.planner_z).shift(x[3] + pp.flow_vel_z),
            2 => {
                pp.thrust_x
                    .shift(self.surge_drift(x[2]))
                    .scale(self.inv_inertia_x)
                    + pp.dist_u
            }
            3 => {
                pp.thrust_z
                    .shift(self.heave_drift(x[3]))
                    .scale(self.inv_inertia_z)
                    + pp.dist_w
            }
            4 => pp.dist_x.shift(x[2] + pp.flow_vel_x),
            5 => pp.dist_z.shift(x[3] + pp.flow_vel_z),
            _ => unreachable!("tracker state has 6 dims"),
        };
        span.abs_max()
    }
}
