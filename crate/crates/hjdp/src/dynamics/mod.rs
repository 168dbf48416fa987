//! Pluggable system dynamics consumed by the PDE solvers.
//!
//! A model supplies the optimal control and disturbance for a given costate,
//! the state rate `f(z, u, d)`, and per-dimension upper bounds on
//! `|dH/dp_d| = |f_d|` over the admissible control and disturbance sets.
//! Models are immutable after construction and evaluated concurrently.

mod dubins;
mod integrator;
mod underwater;

pub use dubins::DubinsCapture3d;
pub use integrator::Integrator1d;
pub use underwater::{UnderwaterParams, UnderwaterTracker6d};

/// Whether an input maximizes or minimizes the Hamiltonian inner product.
///
/// Reach problems (drive toward the target) and avoid problems (flee it)
/// flip which side each player takes, so the orientation is explicit data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptMode {
    Max,
    Min,
}

impl OptMode {
    /// Endpoint of `[lo, hi]` that optimizes `coef * v`; ties (`coef == 0`)
    /// follow sign(0) = +1, so Max picks `hi` and Min picks `lo`.
    #[inline]
    pub fn pick(self, coef: f64, lo: f64, hi: f64) -> f64 {
        match self {
            OptMode::Max => {
                if coef >= 0.0 {
                    hi
                } else {
                    lo
                }
            }
            OptMode::Min => {
                if coef >= 0.0 {
                    lo
                } else {
                    hi
                }
            }
        }
    }
}

/// A closed interval, used both for input bounds and for the exact interval
/// arithmetic behind `partial_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn symmetric(bound: f64) -> Self {
        Self {
            lo: -bound,
            hi: bound,
        }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    #[inline]
    pub fn shift(self, c: f64) -> Self {
        Self {
            lo: self.lo + c,
            hi: self.hi + c,
        }
    }

    #[inline]
    pub fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            Self {
                lo: self.lo * c,
                hi: self.hi * c,
            }
        } else {
            Self {
                lo: self.hi * c,
                hi: self.lo * c,
            }
        }
    }

    /// Largest magnitude attained on the interval.
    #[inline]
    pub fn abs_max(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;

    #[inline]
    fn add(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;

    #[inline]
    fn sub(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo - other.hi,
            hi: self.hi - other.lo,
        }
    }
}

/// System dynamics with bang-bang optimal inputs.
pub trait DynamicsModel: Send + Sync {
    /// Number of state dimensions (must equal the grid's).
    fn state_dims(&self) -> usize;

    fn control_dims(&self) -> usize;

    fn disturbance_dims(&self) -> usize;

    fn control_mode(&self) -> OptMode;

    fn disturbance_mode(&self) -> OptMode;

    /// Control optimizing the Hamiltonian inner product `p . f(x, u, d)` over
    /// the control set, per `control_mode`. Writes into `u`.
    fn opt_ctrl(&self, x: &[f64], p: &[f64], u: &mut [f64]);

    /// Disturbance optimizing `p . f(x, u, d)` per `disturbance_mode`.
    fn opt_dstb(&self, x: &[f64], p: &[f64], d: &mut [f64]);

    /// State rate `f(x, u, d)`, written into `out`.
    fn rate(&self, x: &[f64], u: &[f64], d: &[f64], out: &mut [f64]);

    /// Upper bound on `|f_dim|` over the admissible control and disturbance
    /// boxes and costates in `[min_d, max_d]`. For control-affine models the
    /// costate only selects extremes, so the bound does not depend on it.
    fn partial_bound(&self, dim: usize, x: &[f64], min_d: &[f64], max_d: &[f64]) -> f64;
}
