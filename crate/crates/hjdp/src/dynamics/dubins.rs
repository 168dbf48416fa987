//! Relative dynamics of two Dubins cars (pursuit-evasion capture).
//!
//! State is the pursuer's position and heading relative to the evader,
//! `(x, y, theta)` with `theta` periodic:
//!
//! ```text
//! dx/dt     = -v_a + v_b cos(theta) + a y
//! dy/dt     =  v_a sin(theta) - a x
//! dtheta/dt =  b - a
//! ```
//!
//! `a` is the evader's turn rate (the control, maximizing by default) and
//! `b` the pursuer's (the disturbance, minimizing by default).

use super::{DynamicsModel, Interval, OptMode};

#[derive(Debug, Clone)]
pub struct DubinsCapture3d {
    v_a: f64,
    v_b: f64,
    a_max: f64,
    b_max: f64,
    control_mode: OptMode,
    disturbance_mode: OptMode,
}

impl DubinsCapture3d {
    pub fn new(v_a: f64, v_b: f64, a_max: f64, b_max: f64) -> Self {
        Self {
            v_a,
            v_b,
            a_max,
            b_max,
            control_mode: OptMode::Max,
            disturbance_mode: OptMode::Min,
        }
    }

    pub fn with_modes(mut self, control: OptMode, disturbance: OptMode) -> Self {
        self.control_mode = control;
        self.disturbance_mode = disturbance;
        self
    }
}

impl DynamicsModel for DubinsCapture3d {
    fn state_dims(&self) -> usize {
        3
    }

    fn control_dims(&self) -> usize {
        1
    }

    fn disturbance_dims(&self) -> usize {
        1
    }

    fn control_mode(&self) -> OptMode {
        self.control_mode
    }

    fn disturbance_mode(&self) -> OptMode {
        self.disturbance_mode
    }

    fn opt_ctrl(&self, x: &[f64], p: &[f64], u: &mut [f64]) {
        // Coefficient of `a` in p . f: p0*y - p1*x - p2.
        let q = p[0] * x[1] - p[1] * x[0] - p[2];
        u[0] = self.control_mode.pick(q, -self.a_max, self.a_max);
    }

    fn opt_dstb(&self, _x: &[f64], p: &[f64], d: &mut [f64]) {
        // Coefficient of `b` in p . f is p2.
        d[0] = self.disturbance_mode.pick(p[2], -self.b_max, self.b_max);
    }

    fn rate(&self, x: &[f64], u: &[f64], d: &[f64], out: &mut [f64]) {
        let (sin_t, cos_t) = x[2].sin_cos();
        let a = u[0];
        out[0] = -self.v_a + self.v_b * cos_t + a * x[1];
        out[1] = self.v_a * sin_t - a * x[0];
        out[2] = d[0] - a;
    }

    fn partial_bound(&self, dim: usize, x: &[f64], _min_d: &[f64], _max_d: &[f64]) -> f64 {
        let a = Interval::symmetric(self.a_max);
        match dim {
            0 => a
                .scale(x[1])
                .shift(-self.v_a + self.v_b * x[2].cos())
                .abs_max(),
            1 => a.scale(-x[0]).shift(self.v_a * x[2].sin()).abs_max(),
            2 => self.a_max + self.b_max,
            _ => unreachable!("dubins state has 3 dims"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn optimal_inputs_sit_at_interval_endpoints() {
        let m = DubinsCapture3d::new(1.0, 1.0, 1.0, 1.0);
        let mut u = [0.0];
        let mut d = [0.0];
        // q = p0*y - p1*x - p2
        m.opt_ctrl(&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &mut u); // q = 1
        assert_eq!(u[0], 1.0);
        m.opt_ctrl(&[0.0, 1.0, 0.0], &[-1.0, 0.0, 0.0], &mut u); // q = -1
        assert_eq!(u[0], -1.0);
        m.opt_ctrl(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &mut u); // q = 0 tie
        assert_eq!(u[0], 1.0);
        m.opt_dstb(&[0.0; 3], &[0.0, 0.0, 2.0], &mut d);
        assert_eq!(d[0], -1.0);
        m.opt_dstb(&[0.0; 3], &[0.0, 0.0, -2.0], &mut d);
        assert_eq!(d[0], 1.0);
        m.opt_dstb(&[0.0; 3], &[0.0, 0.0, 0.0], &mut d);
        assert_eq!(d[0], -1.0);
    }

    #[test]
    fn ties_leave_the_hamiltonian_unchanged() {
        let m = DubinsCapture3d::new(1.0, 1.0, 1.0, 1.0);
        let x = [0.3, -0.7, 1.1];
        let p = [0.5, 0.25, 0.0]; // b coefficient is exactly zero
        let mut out = [0.0; 3];
        let mut h = [0.0; 2];
        for (k, b) in [-1.0, 1.0].iter().enumerate() {
            m.rate(&x, &[1.0], &[*b], &mut out);
            h[k] = p.iter().zip(out).map(|(pi, fi)| pi * fi).sum();
        }
        assert!((h[0] - h[1]).abs() < 1e-15);
    }

    #[test]
    fn rate_matches_the_model_equations() {
        let m = DubinsCapture3d::new(1.0, 1.0, 1.0, 1.0);
        let mut out = [0.0; 3];
        m.rate(&[0.0, 0.0, 0.0], &[0.0], &[0.0], &mut out);
        assert_eq!(out, [0.0, 0.0, 0.0]);
        m.rate(&[0.0, 0.0, PI], &[0.0], &[0.0], &mut out);
        assert!((out[0] - (-2.0)).abs() < 1e-15);
        assert!(out[1].abs() < 1e-15);
        assert_eq!(out[2], 0.0);
    }

    #[test]
    fn partial_bound_dominates_sampled_rates() {
        let m = DubinsCapture3d::new(1.0, 0.7, 0.9, 0.4);
        let x = [0.5, -1.25, 2.0];
        // Dense sweep of the (a, b) box.
        let mut worst = [0.0f64; 3];
        let mut out = [0.0; 3];
        for i in 0..=20 {
            for j in 0..=20 {
                let a = -0.9 + 1.8 * i as f64 / 20.0;
                let b = -0.4 + 0.8 * j as f64 / 20.0;
                m.rate(&x, &[a], &[b], &mut out);
                for (w, o) in worst.iter_mut().zip(out) {
                    *w = w.max(o.abs());
                }
            }
        }
        for (d, w) in worst.iter().enumerate() {
            let bound = m.partial_bound(d, &x, &[], &[]);
            assert!(bound + 1e-12 >= *w, "dim {d}: bound {bound} < {w}");
        }
        // dim 0 closed form: |-v_a + v_b cos(theta)| + a_max |y|
        let expect = (-1.0 + 0.7 * x[2].cos()).abs() + 0.9 * 1.25;
        assert!((m.partial_bound(0, &x, &[], &[]) - expect).abs() < 1e-12);
        // dim 2: a_max + b_max
        assert_eq!(m.partial_bound(2, &x, &[], &[]), 1.3);
    }
}
