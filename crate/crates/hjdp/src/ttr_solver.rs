//! Lax-Friedrichs sweeping solver for the stationary time-to-reach PDE.
//!
//! The time-to-reach function is the unique viscosity solution of
//! `H(z, grad phi) = 0` with `phi = 0` on the target, where
//! `H = -grad(phi) . f(z, u*, d*) - 1`. Gauss-Seidel sweeps with alternating
//! traversal directions apply the monotone Lax-Friedrichs update
//!
//! ```text
//! phi_new = c * (-H + sum_d sigma_d (phi[i+1,d] + phi[i-1,d]) / (2 h_d))
//! c       = 1 / sum_d (sigma_d / h_d)
//! ```
//!
//! and keep `min(phi_new, phi)`, so values only decrease and the target
//! stays pinned at zero.
//!
//! The stationary Hamiltonian negates the inner product, so a control that
//! drives the state toward the target (maximizing `-p.f`) corresponds to a
//! model with `control_mode = Min`; see the dynamics module.

use crate::dynamics::DynamicsModel;
use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::grid::{GridAxes, MAX_DIMS};
use crate::sweep::{for_each_node, SweepOrdering, SweepSchedule};

/// Options for a time-to-reach solve.
#[derive(Debug, Clone)]
pub struct TtrOptions {
    /// Convergence threshold on the max pointwise change per sweep.
    pub epsilon: f64,
    pub max_sweeps: usize,
    /// Initial value outside the target; must exceed any reachable time.
    pub large_value: f64,
    pub schedule: SweepSchedule,
}

impl TtrOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_sweeps: 1000,
            large_value: 100.0,
            schedule: SweepSchedule::Alternating,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// A converged (or cut-off) time-to-reach field with solve statistics.
#[derive(Debug)]
pub struct TtrSolution {
    pub field: ValueField,
    pub sweeps: usize,
    pub final_change: f64,
    /// False when max_sweeps was hit before the change dropped below epsilon.
    pub converged: bool,
}

/// Initializes the value function: 0 inside the target (sub-zero set of the
/// implicit surface), `large_value` elsewhere.
pub fn init_ttr(target: &ValueField, options: &TtrOptions) -> Result<ValueField> {
    let mut any_inside = false;
    let data: Vec<f64> = target
        .data()
        .iter()
        .map(|&t| {
            if t <= 0.0 {
                any_inside = true;
                0.0
            } else {
                options.large_value
            }
        })
        .collect();
    if !any_inside {
        return Err(Error::InvalidArgument(
            "target set is empty (no node with value <= 0); time-to-reach is undefined".into(),
        ));
    }
    ValueField::from_parts(data, target.shape().to_vec(), 0.0)
}

/// One in-place Gauss-Seidel sweep over the non-boundary nodes in the given
/// ordering. Returns the largest pointwise change.
pub fn sweep<M: DynamicsModel + ?Sized>(
    phi: &mut ValueField,
    axes: &GridAxes,
    model: &M,
    ordering: &SweepOrdering,
) -> Result<f64> {
    let dims = axes.dims();
    let counts = axes.counts().to_vec();
    let strides = axes.strides().to_vec();
    let spacing = axes.spacing().to_vec();

    let mut x = [0.0f64; MAX_DIMS];
    let mut p = [0.0f64; MAX_DIMS];
    let mut up = [0.0f64; MAX_DIMS];
    let mut down = [0.0f64; MAX_DIMS];
    let mut sigma = [0.0f64; MAX_DIMS];
    let mut u = [0.0f64; 8];
    let mut dist = [0.0f64; 8];
    let mut f = [0.0f64; MAX_DIMS];
    let (nu, nd) = (model.control_dims(), model.disturbance_dims());

    let mut max_change = 0.0f64;
    let mut failure: Option<Error> = None;
    let data = phi.data_mut();

    for_each_node(&counts, ordering, |idx| {
        if failure.is_some() {
            return;
        }
        // Non-periodic faces are handled by the boundary update instead.
        for d in 0..dims {
            if !axes.is_periodic(d) && (idx[d] == 0 || idx[d] == counts[d] - 1) {
                return;
            }
        }
        let mut flat = 0usize;
        for d in 0..dims {
            flat += idx[d] * strides[d];
            x[d] = axes.coords(d)[idx[d]];
        }
        for d in 0..dims {
            let (lo, hi) = if axes.is_periodic(d) {
                let n = counts[d];
                let base = flat - idx[d] * strides[d];
                (
                    base + (idx[d] + n - 1) % n * strides[d],
                    base + (idx[d] + 1) % n * strides[d],
                )
            } else {
                (flat - strides[d], flat + strides[d])
            };
            down[d] = data[lo];
            up[d] = data[hi];
            p[d] = (up[d] - down[d]) / (2.0 * spacing[d]);
        }
        model.opt_ctrl(&x[..dims], &p[..dims], &mut u[..nu]);
        model.opt_dstb(&x[..dims], &p[..dims], &mut dist[..nd]);
        model.rate(&x[..dims], &u[..nu], &dist[..nd], &mut f[..dims]);

        let mut h = -1.0f64;
        for d in 0..dims {
            h -= p[d] * f[d];
        }
        let mut denom = 0.0f64;
        let mut neighbor_sum = 0.0f64;
        for d in 0..dims {
            sigma[d] = model.partial_bound(d, &x[..dims], &p[..dims], &p[..dims]);
            denom += sigma[d] / spacing[d];
            neighbor_sum += sigma[d] * (up[d] + down[d]) / (2.0 * spacing[d]);
        }
        if denom <= 0.0 {
            // Frozen dynamics at this node; the value cannot improve.
            return;
        }
        let phi_new = (-h + neighbor_sum) / denom;
        if !phi_new.is_finite() {
            failure = Some(Error::Numerical(format!(
                "sweep update is not finite at node {:?}",
                idx
            )));
            return;
        }
        let old = data[flat];
        if phi_new < old {
            data[flat] = phi_new;
            max_change = max_change.max(old - phi_new);
        }
    });

    match failure {
        Some(err) => Err(err),
        None => Ok(max_change),
    }
}

/// Extrapolating update of the non-periodic faces:
/// `phi_1 <- min(max(2 phi_2 - phi_3, phi_3), phi_1)` and its mirror at the
/// top face. Returns the largest pointwise change.
pub fn boundary_update(phi: &mut ValueField, axes: &GridAxes) -> f64 {
    let dims = axes.dims();
    let data = phi.data_mut();
    let total = data.len();
    let mut max_change = 0.0f64;
    for d in 0..dims {
        if axes.is_periodic(d) {
            continue;
        }
        let stride = axes.strides()[d];
        let n = axes.counts()[d];
        let lines = total / n;
        for line in 0..lines {
            let base = line / stride * (stride * n) + line % stride;
            // Bottom face.
            let (v1, v2, v3) = (data[base], data[base + stride], data[base + 2 * stride]);
            let new = (2.0 * v2 - v3).max(v3).min(v1);
            if new < v1 {
                max_change = max_change.max(v1 - new);
                data[base] = new;
            }
            // Top face, mirrored.
            let top = base + (n - 1) * stride;
            let (v1, v2, v3) = (data[top], data[top - stride], data[top - 2 * stride]);
            let new = (2.0 * v2 - v3).max(v3).min(v1);
            if new < v1 {
                max_change = max_change.max(v1 - new);
                data[top] = new;
            }
        }
    }
    max_change
}

/// Full time-to-reach solve: initialize from the target, then sweep with the
/// scheduled orderings (boundary update after each sweep) until the largest
/// change drops below epsilon or `max_sweeps` is hit.
pub fn solve_ttr<M: DynamicsModel + ?Sized>(
    target: &ValueField,
    axes: &GridAxes,
    model: &M,
    options: &TtrOptions,
) -> Result<TtrSolution> {
    options.validate()?;
    target.check_matches(axes)?;
    if model.state_dims() != axes.dims() {
        return Err(Error::InvalidArgument(format!(
            "model has {} state dims, grid has {}",
            model.state_dims(),
            axes.dims()
        )));
    }
    let mut phi = init_ttr(target, options)?;
    let orderings = options.schedule.orderings(axes.dims());

    let mut sweeps = 0usize;
    let mut final_change = f64::INFINITY;
    let mut converged = false;
    while sweeps < options.max_sweeps {
        let ordering = &orderings[sweeps % orderings.len()];
        let change = sweep(&mut phi, axes, model, ordering)?;
        let boundary_change = boundary_update(&mut phi, axes);
        final_change = change.max(boundary_change);
        sweeps += 1;
        if final_change < options.epsilon {
            converged = true;
            break;
        }
    }
    Ok(TtrSolution {
        field: phi,
        sweeps,
        final_change,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Integrator1d, OptMode};
    use crate::grid::{build_grid, GridSpec};
    use crate::shapes::sphere_sdf;

    fn line_axes(n: usize) -> GridAxes {
        build_grid(GridSpec::new(vec![-1.0], vec![1.0], vec![n], vec![false])).unwrap()
    }

    #[test]
    fn init_zeroes_target_and_rejects_empty() {
        let axes = line_axes(9);
        let target = sphere_sdf(&axes, &[0.0], 0.25).unwrap();
        let options = TtrOptions::new(1e-6);
        let phi = init_ttr(&target, &options).unwrap();
        for (t, v) in target.data().iter().zip(phi.data()) {
            if *t <= 0.0 {
                assert_eq!(*v, 0.0);
            } else {
                assert_eq!(*v, 100.0);
            }
        }
        let empty = ValueField::from_parts(vec![1.0; 9], vec![9], 0.0).unwrap();
        assert!(init_ttr(&empty, &options).is_err());
    }

    #[test]
    fn converges_to_the_analytic_distance_over_speed() {
        let axes = line_axes(201);
        let target = sphere_sdf(&axes, &[0.0], 0.25).unwrap();
        let model = Integrator1d::new(1.0, OptMode::Min);
        let solution = solve_ttr(&target, &axes, &model, &TtrOptions::new(1e-6)).unwrap();
        assert!(solution.converged);
        let dx = axes.spacing()[0];
        for (i, v) in solution.field.data().iter().enumerate() {
            let x = axes.coords(0)[i];
            let exact = (x.abs() - 0.25).max(0.0);
            assert!((v - exact).abs() <= 2.0 * dx, "x={x}: {v} vs {exact}");
        }
    }

    #[test]
    fn doubling_speed_halves_the_reach_time() {
        let axes = line_axes(101);
        let target = sphere_sdf(&axes, &[0.0], 0.25).unwrap();
        let slow = Integrator1d::new(1.0, OptMode::Min);
        let fast = Integrator1d::new(2.0, OptMode::Min);
        let opt = TtrOptions::new(1e-9);
        let phi1 = solve_ttr(&target, &axes, &slow, &opt).unwrap().field;
        let phi2 = solve_ttr(&target, &axes, &fast, &opt).unwrap().field;
        for i in (5..95).step_by(10) {
            assert!(
                (phi1.data()[i] / 2.0 - phi2.data()[i]).abs() < 1e-6,
                "node {i}"
            );
        }
    }

    #[test]
    fn values_monotone_and_target_pinned() {
        let axes = line_axes(101);
        let target = sphere_sdf(&axes, &[0.0], 0.25).unwrap();
        let model = Integrator1d::new(1.0, OptMode::Min);
        let options = TtrOptions::new(1e-6);
        let mut phi = init_ttr(&target, &options).unwrap();
        let orderings = options.schedule.orderings(1);
        let mut prev = phi.clone();
        for s in 0..6 {
            sweep(&mut phi, &axes, &model, &orderings[s % 8]).unwrap();
            boundary_update(&mut phi, &axes);
            for (before, after) in prev.data().iter().zip(phi.data()) {
                assert!(after <= before);
                assert!(*after >= 0.0);
            }
            for (t, v) in target.data().iter().zip(phi.data()) {
                if *t <= 0.0 {
                    assert_eq!(*v, 0.0);
                }
            }
            prev = phi.clone();
        }
    }

    #[test]
    fn whole_domain_target_converges_immediately() {
        let axes = line_axes(51);
        let target = ValueField::from_parts(vec![-1.0; 51], vec![51], 0.0).unwrap();
        let model = Integrator1d::new(1.0, OptMode::Min);
        let solution = solve_ttr(&target, &axes, &model, &TtrOptions::new(1e-6)).unwrap();
        assert!(solution.converged);
        assert_eq!(solution.sweeps, 1);
        assert!(solution.field.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn huge_epsilon_terminates_after_first_cycle() {
        let axes = line_axes(51);
        let target = sphere_sdf(&axes, &[0.0], 0.25).unwrap();
        let model = Integrator1d::new(1.0, OptMode::Min);
        let solution = solve_ttr(&target, &axes, &model, &TtrOptions::new(1e6)).unwrap();
        assert!(solution.converged);
        assert_eq!(solution.sweeps, 1);
    }

    #[test]
    fn boundary_update_formula() {
        let axes = line_axes(5);
        // phi1=100, phi2=1, phi3=2 -> min(max(0, 2), 100) = 2 at the bottom face.
        let mut phi =
            ValueField::from_parts(vec![100.0, 1.0, 2.0, 1.0, 0.5], vec![5], 0.0).unwrap();
        boundary_update(&mut phi, &axes);
        assert_eq!(phi.data()[0], 2.0);
        // Top face: 2*1 - 2 = 0, max(0, 2) = 2, min(2, 0.5) keeps 0.5.
        assert_eq!(phi.data()[4], 0.5);
        // A zero boundary value (inside the target) is preserved.
        let mut phi = ValueField::from_parts(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![5], 0.0).unwrap();
        boundary_update(&mut phi, &axes);
        assert_eq!(phi.data()[0], 0.0);
        // Flat interior extrapolates flat: phi2 = phi3 = c -> min(c, phi1).
        let mut phi = ValueField::from_parts(vec![9.0, 3.0, 3.0, 3.0, 9.0], vec![5], 0.0).unwrap();
        boundary_update(&mut phi, &axes);
        assert_eq!(phi.data()[0], 3.0);
        assert_eq!(phi.data()[4], 3.0);
    }

    #[test]
    fn non_convergence_is_flagged_not_silent() {
        let axes = line_axes(201);
        let target = sphere_sdf(&axes, &[0.0], 0.25).unwrap();
        let model = Integrator1d::new(1.0, OptMode::Min);
        let mut options = TtrOptions::new(1e-12);
        options.max_sweeps = 2;
        let solution = solve_ttr(&target, &axes, &model, &options).unwrap();
        assert!(!solution.converged);
        assert_eq!(solution.sweeps, 2);
    }

    #[test]
    fn dubins_ttr_converges_with_a_periodic_dim() {
        // Reach problem: the pursuer's turn rate maximizes the stationary
        // Hamiltonian (control Min), the evader's minimizes it (disturbance
        // Max). Values where escape is possible stay at large_value.
        let axes = build_grid(GridSpec::new(
            vec![-2.0, -2.0, -std::f64::consts::PI],
            vec![2.0, 2.0, std::f64::consts::PI],
            vec![21, 21, 21],
            vec![false, false, true],
        ))
        .unwrap();
        let target = crate::shapes::cylinder_sdf(&axes, &[2], &[0.0, 0.0], 0.5).unwrap();
        let model = crate::dynamics::DubinsCapture3d::new(1.0, 1.0, 1.0, 1.0)
            .with_modes(OptMode::Min, OptMode::Max);
        let mut options = TtrOptions::new(1e-4);
        options.max_sweeps = 500;
        let solution = solve_ttr(&target, &axes, &model, &options).unwrap();
        assert!(solution.converged);
        assert!(solution.field.is_finite());
        for (t, v) in target.data().iter().zip(solution.field.data()) {
            assert!(*v >= 0.0 && *v <= 100.0);
            if *t <= 0.0 {
                assert_eq!(*v, 0.0);
            }
        }
        // Some node outside the target is actually reachable.
        let improved = target
            .data()
            .iter()
            .zip(solution.field.data())
            .any(|(t, v)| *t > 0.0 && *v < 99.0);
        assert!(improved, "no value propagated out of the target");
    }

    #[test]
    fn alternating_needs_no_more_sweeps_than_fixed() {
        let axes = line_axes(201);
        let target = sphere_sdf(&axes, &[0.0], 0.25).unwrap();
        let model = Integrator1d::new(1.0, OptMode::Min);
        let mut alt = TtrOptions::new(1e-6);
        alt.max_sweeps = 2000;
        let mut fixed = alt.clone();
        fixed.schedule = SweepSchedule::Fixed;
        let a = solve_ttr(&target, &axes, &model, &alt).unwrap();
        let f = solve_ttr(&target, &axes, &model, &fixed).unwrap();
        assert!(a.converged && f.converged);
        assert!(
            a.sweeps <= f.sweeps,
            "alternating {} vs fixed {}",
            a.sweeps,
            f.sweeps
        );
        assert!(a.sweeps < f.sweeps, "expected strictly fewer sweeps");
    }
}
