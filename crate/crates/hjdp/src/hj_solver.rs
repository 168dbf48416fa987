//! Time-dependent Hamilton-Jacobi PDE solver for backward reachable sets
//! and tubes.
//!
//! Each step makes two passes over the grid: the first evaluates the
//! Hamiltonian and the global derivative range, the second applies the
//! Lax-Friedrichs dissipation (recomputing derivatives rather than storing
//! per-dimension arrays, so the solver keeps exactly one temporary array).
//! A CFL-limited first-order Runge-Kutta update then advances the field;
//! in tube mode the update is clamped by the previous field pointwise.
//!
//! The field advances by `V += dt * H`, so the dissipation enters as
//! `H + alpha (D+ - D-) / 2`: in this time orientation that sign is the
//! diffusive one, damping grid-scale oscillations instead of feeding them.
//!
//! Within a pass, nodes are partitioned across workers by grid row; each
//! worker writes only its own rows of the temporary array and folds a
//! private derivative-range accumulator. The folds use min/max only, which
//! are exactly associative and commutative, so results are bit-identical
//! for any worker count.

use rayon::prelude::*;

use crate::dynamics::DynamicsModel;
use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::grid::{GridAxes, MAX_DIMS};
use crate::numerics::{self, cfl_timestep, DissipationBounds, Scheme};

/// Options for a backward reachability solve.
#[derive(Debug, Clone)]
pub struct PdeSolveOptions {
    /// Time horizon T > 0; the PDE runs over s in [-T, 0], reported as
    /// forward elapsed time in [0, T].
    pub horizon: f64,
    pub scheme: Scheme,
    /// CFL safety factor in (0, 1].
    pub cfl_factor: f64,
    /// Take the pointwise min with the previous field after each step,
    /// turning the reachable set into a reachable tube.
    pub tube_mode: bool,
    /// Emit a checkpoint every this many time units.
    pub save_every: Option<f64>,
    /// Worker threads; `None` uses the default pool size.
    pub workers: Option<usize>,
    /// Abort when max |V| exceeds this (a CFL violation or bad dynamics).
    pub divergence_threshold: f64,
}

impl PdeSolveOptions {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            scheme: Scheme::Upwind1,
            cfl_factor: 0.8,
            tube_mode: true,
            save_every: None,
            workers: None,
            divergence_threshold: 1e10,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cfl_factor must be in (0, 1], got {}",
                self.cfl_factor
            )));
        }
        Ok(())
    }
}

/// Result of a reachability solve: checkpoint fields in time order, the
/// last one at the horizon.
#[derive(Debug)]
pub struct PdeSolution {
    pub checkpoints: Vec<ValueField>,
    pub steps: usize,
}

impl PdeSolution {
    /// The field at the horizon.
    pub fn final_field(&self) -> &ValueField {
        self.checkpoints
            .last()
            .expect("solution holds at least the final field")
    }
}

const MAX_INPUTS: usize = 8;

/// First pass of a step: per node, the Hamiltonian `p . f(x, u*, d*)` with
/// `p` the central derivative estimate, while folding the global min/max of
/// the one-sided estimates per dimension.
pub fn hamiltonian_pass<M: DynamicsModel + ?Sized>(
    field: &ValueField,
    axes: &GridAxes,
    model: &M,
    scheme: Scheme,
    h_out: &mut [f64],
) -> Result<DissipationBounds> {
    let dims = axes.dims();
    let row_len = axes.counts()[dims - 1];
    let data = field.data();
    h_out
        .par_chunks_mut(row_len)
        .enumerate()
        .try_fold(
            || DissipationBounds::new(dims),
            |mut acc, (row, h_row)| {
                hamiltonian_row(data, axes, model, scheme, row, h_row, &mut acc)?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || DissipationBounds::new(dims),
            |mut a, b| {
                a.merge(&b);
                Ok(a)
            },
        )
}

fn hamiltonian_row<M: DynamicsModel + ?Sized>(
    data: &[f64],
    axes: &GridAxes,
    model: &M,
    scheme: Scheme,
    row: usize,
    h_row: &mut [f64],
    bounds: &mut DissipationBounds,
) -> Result<()> {
    let dims = axes.dims();
    let last = dims - 1;
    let mut idx = [0usize; MAX_DIMS];
    decode_row(axes, row, &mut idx);
    let row_start = row * h_row.len();

    let mut x = [0.0f64; MAX_DIMS];
    for d in 0..last {
        x[d] = axes.coords(d)[idx[d]];
    }
    let mut p = [0.0f64; MAX_DIMS];
    let mut u = [0.0f64; MAX_INPUTS];
    let mut dist = [0.0f64; MAX_INPUTS];
    let mut f = [0.0f64; MAX_DIMS];
    let (nu, nd) = (model.control_dims(), model.disturbance_dims());

    for (k, h_out) in h_row.iter_mut().enumerate() {
        let flat = row_start + k;
        idx[last] = k;
        x[last] = axes.coords(last)[k];
        for dim in 0..dims {
            let pair = numerics::derivative_at(scheme, data, axes, flat, idx[dim], dim);
            bounds.update(dim, &pair);
            p[dim] = pair.central();
        }
        model.opt_ctrl(&x[..dims], &p[..dims], &mut u[..nu]);
        model.opt_dstb(&x[..dims], &p[..dims], &mut dist[..nd]);
        model.rate(&x[..dims], &u[..nu], &dist[..nd], &mut f[..dims]);
        let mut h = 0.0;
        for d in 0..dims {
            h += p[d] * f[d];
        }
        if !h.is_finite() {
            return Err(Error::Numerical(format!(
                "Hamiltonian is not finite at node {:?}",
                &idx[..dims]
            )));
        }
        *h_out = h;
    }
    Ok(())
}

/// Second pass: per node, apply the Lax-Friedrichs dissipation
/// `H + sum_d alpha_d (D+ - D-) / 2` with `alpha_d` the model's derivative
/// bound over the step's costate range, folding the per-dimension max of
/// alpha into `bounds.alpha_max`. Derivatives are recomputed, not stored.
pub fn dissipation_pass<M: DynamicsModel + ?Sized>(
    h_inout: &mut [f64],
    field: &ValueField,
    axes: &GridAxes,
    bounds: &mut DissipationBounds,
    model: &M,
    scheme: Scheme,
) -> Result<()> {
    let dims = axes.dims();
    let row_len = axes.counts()[dims - 1];
    let data = field.data();
    let min_d = bounds.min_d.clone();
    let max_d = bounds.max_d.clone();
    let alpha_max = h_inout
        .par_chunks_mut(row_len)
        .enumerate()
        .try_fold(
            || vec![0.0f64; dims],
            |mut acc, (row, h_row)| {
                dissipation_row(
                    data, axes, model, scheme, &min_d, &max_d, row, h_row, &mut acc,
                )?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![0.0f64; dims],
            |mut a, b| {
                for d in 0..dims {
                    a[d] = a[d].max(b[d]);
                }
                Ok(a)
            },
        )?;
    bounds.alpha_max = alpha_max;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn dissipation_row<M: DynamicsModel + ?Sized>(
    data: &[f64],
    axes: &GridAxes,
    model: &M,
    scheme: Scheme,
    min_d: &[f64],
    max_d: &[f64],
    row: usize,
    h_row: &mut [f64],
    alpha_acc: &mut [f64],
) -> Result<()> {
    let dims = axes.dims();
    let last = dims - 1;
    let mut idx = [0usize; MAX_DIMS];
    decode_row(axes, row, &mut idx);
    let row_start = row * h_row.len();

    let mut x = [0.0f64; MAX_DIMS];
    for d in 0..last {
        x[d] = axes.coords(d)[idx[d]];
    }
    for (k, h_out) in h_row.iter_mut().enumerate() {
        let flat = row_start + k;
        idx[last] = k;
        x[last] = axes.coords(last)[k];
        let mut jump = 0.0;
        for dim in 0..dims {
            let pair = numerics::derivative_at(scheme, data, axes, flat, idx[dim], dim);
            let alpha = model.partial_bound(dim, &x[..dims], min_d, max_d);
            jump += alpha * 0.5 * (pair.right - pair.left);
            alpha_acc[dim] = alpha_acc[dim].max(alpha);
        }
        let h = *h_out + jump;
        if !h.is_finite() {
            return Err(Error::Numerical(format!(
                "dissipated Hamiltonian is not finite at node {:?}",
                &idx[..dims]
            )));
        }
        *h_out = h;
    }
    Ok(())
}

/// Multi-index of the first node in a row (all dims except the last).
fn decode_row(axes: &GridAxes, row: usize, idx: &mut [usize; MAX_DIMS]) {
    let dims = axes.dims();
    let mut rem = row;
    for d in (0..dims - 1).rev() {
        idx[d] = rem % axes.counts()[d];
        rem /= axes.counts()[d];
    }
}

/// Fused RK1 update `V += dt * H` (clamped by the previous value in tube
/// mode), returning max |V| for the divergence guard.
fn apply_update(v: &mut [f64], h: &[f64], dt: f64, tube_mode: bool) -> f64 {
    if tube_mode {
        v.par_iter_mut()
            .zip(h.par_iter())
            .fold(
                || 0.0f64,
                |m, (vi, hi)| {
                    let updated = (*vi + dt * hi).min(*vi);
                    *vi = updated;
                    m.max(updated.abs())
                },
            )
            .reduce(|| 0.0f64, f64::max)
    } else {
        v.par_iter_mut()
            .zip(h.par_iter())
            .fold(
                || 0.0f64,
                |m, (vi, hi)| {
                    *vi += dt * hi;
                    m.max(vi.abs())
                },
            )
            .reduce(|| 0.0f64, f64::max)
    }
}

/// Solves the time-dependent HJ PDE from `initial` out to the horizon,
/// returning checkpoints at every `save_every` boundary plus the final
/// field. Time steps are CFL-limited and clipped so checkpoints land
/// exactly on the requested times.
pub fn solve_pde<M: DynamicsModel + ?Sized>(
    initial: ValueField,
    axes: &GridAxes,
    model: &M,
    options: &PdeSolveOptions,
) -> Result<PdeSolution> {
    options.validate()?;
    initial.check_matches(axes)?;
    if model.state_dims() != axes.dims() {
        return Err(Error::InvalidArgument(format!(
            "model has {} state dims, grid has {}",
            model.state_dims(),
            axes.dims()
        )));
    }
    if !initial.is_finite() {
        return Err(Error::Numerical("initial field contains NaN or Inf".into()));
    }
    if let Some(interval) = options.save_every {
        if !(interval > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "save_every must be > 0, got {interval}"
            )));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| solve_pde_inner(initial, axes, model, options))
}

fn solve_pde_inner<M: DynamicsModel + ?Sized>(
    mut v: ValueField,
    axes: &GridAxes,
    model: &M,
    options: &PdeSolveOptions,
) -> Result<PdeSolution> {
    v.set_time(0.0);
    let mut h = vec![0.0f64; v.len()];
    let mut checkpoints = Vec::new();
    let mut elapsed = 0.0f64;
    let mut save_count = 0usize;
    let mut steps = 0usize;

    while elapsed < options.horizon {
        // The next exact stop: a checkpoint boundary or the horizon.
        let next_stop = match options.save_every {
            Some(interval) => {
                let boundary = interval * (save_count + 1) as f64;
                boundary.min(options.horizon)
            }
            None => options.horizon,
        };
        let remaining = next_stop - elapsed;
        let mut bounds = hamiltonian_pass(&v, axes, model, options.scheme, &mut h)?;
        dissipation_pass(&mut h, &v, axes, &mut bounds, model, options.scheme)?;
        let cfl = cfl_timestep(
            &bounds.alpha_max,
            axes.spacing(),
            options.cfl_factor,
            remaining,
        );
        let dt = if cfl >= remaining {
            elapsed = next_stop;
            remaining
        } else {
            elapsed += cfl;
            cfl
        };
        let max_abs = apply_update(v.data_mut(), &h, dt, options.tube_mode);
        v.set_time(elapsed);
        steps += 1;
        if max_abs > options.divergence_threshold {
            return Err(Error::Numerical(format!(
                "field magnitude {max_abs:.3e} exceeded the divergence threshold \
                 {:.3e} at t={elapsed} (CFL violation or bad dynamics)",
                options.divergence_threshold
            )));
        }
        if let Some(interval) = options.save_every {
            if elapsed == interval * (save_count + 1) as f64 {
                save_count += 1;
                if elapsed < options.horizon {
                    checkpoints.push(v.clone());
                }
            }
        }
    }
    checkpoints.push(v);
    Ok(PdeSolution { checkpoints, steps })
}
