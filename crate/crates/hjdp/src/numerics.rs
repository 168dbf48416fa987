//! Spatial derivative approximations (first-order upwind and second-order
//! ENO), Lax-Friedrichs dissipation, the CFL time step, and the first-order
//! Runge-Kutta update.

use crate::field::ValueField;
use crate::grid::{self, GridAxes};

/// Numerical scheme for one-sided spatial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Upwind1,
    Eno2,
}

/// One-sided derivative approximations at a node: `left` is the backward
/// difference D-, `right` the forward difference D+.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativePair {
    pub left: f64,
    pub right: f64,
}

impl DerivativePair {
    /// Central costate estimate fed to the optimal-input selectors.
    #[inline]
    pub fn central(&self) -> f64 {
        0.5 * (self.left + self.right)
    }
}

/// Per-dimension derivative range and dissipation coefficients accumulated
/// over one solver step.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationBounds {
    pub min_d: Vec<f64>,
    pub max_d: Vec<f64>,
    pub alpha_max: Vec<f64>,
}

impl DissipationBounds {
    pub fn new(dims: usize) -> Self {
        Self {
            min_d: vec![f64::INFINITY; dims],
            max_d: vec![f64::NEG_INFINITY; dims],
            alpha_max: vec![0.0; dims],
        }
    }

    #[inline]
    pub fn update(&mut self, dim: usize, pair: &DerivativePair) {
        self.min_d[dim] = self.min_d[dim].min(pair.left).min(pair.right);
        self.max_d[dim] = self.max_d[dim].max(pair.left).max(pair.right);
    }

    /// Merges a worker-private accumulator; min/max folds are exactly
    /// associative and commutative, so merge order never changes the result.
    pub fn merge(&mut self, other: &DissipationBounds) {
        for d in 0..self.min_d.len() {
            self.min_d[d] = self.min_d[d].min(other.min_d[d]);
            self.max_d[d] = self.max_d[d].max(other.max_d[d]);
            self.alpha_max[d] = self.alpha_max[d].max(other.alpha_max[d]);
        }
    }
}

/// First-order upwind derivative pair along `dim`, using ghost or wrapped
/// neighbors at the grid edges.
pub fn upwind_first(
    field: &ValueField,
    axes: &GridAxes,
    dim: usize,
    index: &[usize],
) -> DerivativePair {
    let flat = axes.flat_index(index);
    upwind_first_at(field.data(), axes, flat, index[dim], dim)
}

#[inline]
pub(crate) fn upwind_first_at(
    data: &[f64],
    axes: &GridAxes,
    flat: usize,
    pos: usize,
    dim: usize,
) -> DerivativePair {
    let inv_h = 1.0 / axes.spacing()[dim];
    let v0 = data[flat];
    let vm1 = grid::sample(data, axes, flat, pos, dim, -1);
    let vp1 = grid::sample(data, axes, flat, pos, dim, 1);
    DerivativePair {
        left: (v0 - vm1) * inv_h,
        right: (vp1 - v0) * inv_h,
    }
}

/// Second-order ENO derivative pair along `dim`.
///
/// Each one-sided difference is corrected by `(h/2) * m`, where `m` is the
/// second divided difference of whichever candidate stencil has the smaller
/// magnitude (ties keep the left-biased stencil).
pub fn eno2(field: &ValueField, axes: &GridAxes, dim: usize, index: &[usize]) -> DerivativePair {
    let flat = axes.flat_index(index);
    eno2_at(field.data(), axes, flat, index[dim], dim)
}

#[inline]
pub(crate) fn eno2_at(
    data: &[f64],
    axes: &GridAxes,
    flat: usize,
    pos: usize,
    dim: usize,
) -> DerivativePair {
    let h = axes.spacing()[dim];
    let inv_h = 1.0 / h;
    let v0 = data[flat];
    let vm2 = grid::sample(data, axes, flat, pos, dim, -2);
    let vm1 = grid::sample(data, axes, flat, pos, dim, -1);
    let vp1 = grid::sample(data, axes, flat, pos, dim, 1);
    let vp2 = grid::sample(data, axes, flat, pos, dim, 2);

    let inv_h2 = inv_h * inv_h;
    let dd_left = (v0 - 2.0 * vm1 + vm2) * inv_h2;
    let dd_center = (vp1 - 2.0 * v0 + vm1) * inv_h2;
    let dd_right = (vp2 - 2.0 * vp1 + v0) * inv_h2;

    let left = (v0 - vm1) * inv_h + 0.5 * h * smaller_magnitude(dd_left, dd_center);
    let right = (vp1 - v0) * inv_h - 0.5 * h * smaller_magnitude(dd_center, dd_right);
    DerivativePair { left, right }
}

/// Candidate with the smaller magnitude; ties keep the first (left-biased).
#[inline]
fn smaller_magnitude(a: f64, b: f64) -> f64 {
    if a.abs() <= b.abs() {
        a
    } else {
        b
    }
}

/// Evaluates the derivative pair for `scheme`.
#[inline]
pub(crate) fn derivative_at(
    scheme: Scheme,
    data: &[f64],
    axes: &GridAxes,
    flat: usize,
    pos: usize,
    dim: usize,
) -> DerivativePair {
    match scheme {
        Scheme::Upwind1 => upwind_first_at(data, axes, flat, pos, dim),
        Scheme::Eno2 => eno2_at(data, axes, flat, pos, dim),
    }
}

/// Lax-Friedrichs artificial dissipation: `H - sum_d alpha_d (D+ - D-) / 2`.
pub fn lax_friedrichs_dissipate(h_value: f64, pairs: &[DerivativePair], alpha: &[f64]) -> f64 {
    let jump: f64 = pairs
        .iter()
        .zip(alpha)
        .map(|(pair, a)| a * 0.5 * (pair.right - pair.left))
        .sum();
    h_value - jump
}

/// CFL-limited integration step `factor / sum_d(alpha_max_d / h_d)`.
///
/// When every `alpha_max` is zero the dynamics are frozen and the field is
/// stationary, so the remaining time to the horizon is returned instead.
pub fn cfl_timestep(alpha_max: &[f64], spacing: &[f64], factor: f64, remaining: f64) -> f64 {
    let sum: f64 = alpha_max.iter().zip(spacing).map(|(a, h)| a / h).sum();
    if sum <= 0.0 {
        remaining
    } else {
        factor / sum
    }
}

/// First-order Runge-Kutta update `V += dt * H`, advancing the time stamp.
pub fn rk1_step(field: &mut ValueField, h_field: &[f64], dt: f64) {
    debug_assert_eq!(field.len(), h_field.len());
    for (v, h) in field.data_mut().iter_mut().zip(h_field) {
        *v += dt * h;
    }
    let t = field.time();
    field.set_time(t + dt);
}
