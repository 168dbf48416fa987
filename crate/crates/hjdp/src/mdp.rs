//! Value iteration over discretized continuous state and action spaces.
//!
//! Successor states produced by the transition model are continuous points;
//! each is snapped to the nearest grid node before the value lookup. Updates
//! run in place (Gauss-Seidel) with alternating sweep orderings by default;
//! a Jacobi mode (fresh array per iteration) is available for contraction
//! checks.

use crate::dynamics::DynamicsModel;
use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::grid::{nearest_index, GridAxes, MAX_DIMS};
use crate::sweep::{for_each_node, SweepSchedule};

/// Produces the successor distribution of a (state, action) pair.
///
/// Implementations call `emit(next_state, probability)` once per successor;
/// probabilities must be non-negative and sum to 1.
pub trait TransitionModel: Send + Sync {
    fn successors(&self, state: &[f64], action: &[f64], emit: &mut dyn FnMut(&[f64], f64));
}

/// Deterministic Euler step of a dynamics model, `next = x + dt f(x, u, 0)`,
/// optionally spread over a list of additive offsets with probabilities.
pub struct EulerTransition<M: DynamicsModel> {
    model: M,
    timestep: f64,
    noise: Vec<(Vec<f64>, f64)>,
}

impl<M: DynamicsModel> EulerTransition<M> {
    pub fn new(model: M, timestep: f64) -> Self {
        Self {
            model,
            timestep,
            noise: Vec::new(),
        }
    }

    /// Replaces the deterministic successor with `next + offset_k` at
    /// probability `prob_k` for each noise entry.
    pub fn with_noise(mut self, noise: Vec<(Vec<f64>, f64)>) -> Self {
        self.noise = noise;
        self
    }
}

impl<M: DynamicsModel> TransitionModel for EulerTransition<M> {
    fn successors(&self, state: &[f64], action: &[f64], emit: &mut dyn FnMut(&[f64], f64)) {
        let dims = state.len();
        let mut rate = [0.0f64; MAX_DIMS];
        let zero_dist = [0.0f64; 8];
        self.model.rate(
            state,
            action,
            &zero_dist[..self.model.disturbance_dims()],
            &mut rate[..dims],
        );
        let mut next = [0.0f64; MAX_DIMS];
        for d in 0..dims {
            next[d] = state[d] + self.timestep * rate[d];
        }
        if self.noise.is_empty() {
            emit(&next[..dims], 1.0);
        } else {
            let mut shifted = [0.0f64; MAX_DIMS];
            for (offset, prob) in &self.noise {
                for d in 0..dims {
                    shifted[d] = next[d] + offset[d];
                }
                emit(&shifted[..dims], *prob);
            }
        }
    }
}

/// How value updates are applied each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// In-place updates, visible to later nodes within the same sweep.
    #[default]
    GaussSeidel,
    /// Updates written to a fresh array; the textbook contraction.
    Jacobi,
}

/// A continuous-space MDP discretized on a state grid and an action grid.
pub struct MdpProblem<'a> {
    pub state_axes: &'a GridAxes,
    pub action_axes: &'a GridAxes,
    pub transition: &'a dyn TransitionModel,
    pub reward: &'a (dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync),
    /// Discount factor in [0, 1).
    pub discount: f64,
    /// Convergence threshold on the max pointwise change per sweep.
    pub threshold: f64,
    pub max_iterations: usize,
    pub update: UpdateMode,
    pub schedule: SweepSchedule,
}

impl MdpProblem<'_> {
    fn validate(&self) -> Result<()> {
        if !(self.discount >= 0.0 && self.discount < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "discount must be in [0, 1), got {}",
                self.discount
            )));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold must be > 0, got {}",
                self.threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Converged values plus solve statistics.
#[derive(Debug)]
pub struct MdpSolution {
    pub values: ValueField,
    pub iterations: usize,
    pub final_delta: f64,
    /// Max pointwise change after each full sweep.
    pub delta_history: Vec<f64>,
    /// False when max_iterations was hit before the threshold.
    pub converged: bool,
}

/// Best action index per state node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyField {
    pub actions: Vec<usize>,
    pub shape: Vec<usize>,
}

/// One Bellman backup at a state node: maximizes
/// `R(s, a) + gamma * sum_s' p(s'|s,a) V(snap(s'))` over all action nodes.
/// Ties pick the lowest action index.
pub fn bellman_backup(
    values: &[f64],
    problem: &MdpProblem<'_>,
    state_idx: &[usize],
) -> (f64, usize) {
    let sdims = problem.state_axes.dims();
    let mut state = [0.0f64; MAX_DIMS];
    problem
        .state_axes
        .node_coords(state_idx, &mut state[..sdims]);

    let adims = problem.action_axes.dims();
    let mut action = [0.0f64; MAX_DIMS];
    let mut snap = [0usize; MAX_DIMS];
    let mut best_value = f64::NEG_INFINITY;
    let mut best_action = 0usize;
    let mut action_flat = 0usize;

    let forward = crate::sweep::SweepOrdering::forward(adims);
    for_each_node(problem.action_axes.counts(), &forward, |a_idx| {
        problem.action_axes.node_coords(a_idx, &mut action[..adims]);
        let mut expected = 0.0f64;
        problem
            .transition
            .successors(&state[..sdims], &action[..adims], &mut |next, prob| {
                nearest_index(problem.state_axes, next, &mut snap[..sdims]);
                expected += prob * values[problem.state_axes.flat_index(&snap[..sdims])];
            });
        let q = (problem.reward)(&state[..sdims], &action[..adims]) + problem.discount * expected;
        if q > best_value {
            best_value = q;
            best_action = action_flat;
        }
        action_flat += 1;
    });
    (best_value, best_action)
}

/// Value iteration from V = 0 until the max pointwise change over a full
/// sweep drops below the threshold.
pub fn value_iteration(problem: &MdpProblem<'_>) -> Result<MdpSolution> {
    problem.validate()?;
    let axes = problem.state_axes;
    let mut values = ValueField::zeros(axes);
    let orderings = problem.schedule.orderings(axes.dims());
    let mut delta_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0usize;

    let mut scratch = match problem.update {
        UpdateMode::Jacobi => vec![0.0f64; values.len()],
        UpdateMode::GaussSeidel => Vec::new(),
    };

    while iterations < problem.max_iterations {
        let ordering = &orderings[iterations % orderings.len()];
        let mut delta = 0.0f64;
        match problem.update {
            UpdateMode::GaussSeidel => {
                // Values are read through a raw view while being updated in
                // place; Gauss-Seidel makes fresh values visible immediately.
                for_each_node(axes.counts(), ordering, |idx| {
                    let flat = axes.flat_index(idx);
                    let (q, _) = bellman_backup(values.data(), problem, idx);
                    let old = values.data()[flat];
                    values.data_mut()[flat] = q;
                    delta = delta.max((q - old).abs());
                });
            }
            UpdateMode::Jacobi => {
                for_each_node(axes.counts(), ordering, |idx| {
                    let flat = axes.flat_index(idx);
                    let (q, _) = bellman_backup(values.data(), problem, idx);
                    scratch[flat] = q;
                });
                for (v, s) in values.data_mut().iter_mut().zip(&scratch) {
                    delta = delta.max((*s - *v).abs());
                    *v = *s;
                }
            }
        }
        delta_history.push(delta);
        iterations += 1;
        if delta < problem.threshold {
            converged = true;
            break;
        }
    }
    let final_delta = delta_history.last().copied().unwrap_or(0.0);
    Ok(MdpSolution {
        values,
        iterations,
        final_delta,
        delta_history,
        converged,
    })
}

/// Greedy policy extraction: the argmax action of a Bellman backup on the
/// final values, with the same lowest-index tie-break.
pub fn extract_policy(values: &ValueField, problem: &MdpProblem<'_>) -> PolicyField {
    let axes = problem.state_axes;
    let mut actions = vec![0usize; values.len()];
    let forward = crate::sweep::SweepOrdering::forward(axes.dims());
    for_each_node(axes.counts(), &forward, |idx| {
        let flat = axes.flat_index(idx);
        let (_, a) = bellman_backup(values.data(), problem, idx);
        actions[flat] = a;
    });
    PolicyField {
        actions,
        shape: values.shape().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};

    /// Tabular transition over grid-node states, for hand-built problems.
    struct Tabular {
        /// successors[state][action] = (next state coord, probability) list.
        successors: Vec<Vec<Vec<(f64, f64)>>>,
        spacing: f64,
        min: f64,
    }

    impl TransitionModel for Tabular {
        fn successors(&self, state: &[f64], action: &[f64], emit: &mut dyn FnMut(&[f64], f64)) {
            let s = ((state[0] - self.min) / self.spacing).round() as usize;
            let a = action[0].round() as usize;
            for (next, prob) in &self.successors[s][a] {
                emit(&[*next], *prob);
            }
        }
    }

    fn chain_axes(n: usize) -> GridAxes {
        build_grid(GridSpec::new(
            vec![0.0],
            vec![(n - 1) as f64],
            vec![n],
            vec![false],
        ))
        .unwrap()
    }

    /// Chain with an absorbing goal at the right end paying 1 per step;
    /// action 0 steps left, action 1 steps right.
    fn chain_transition(n: usize) -> Tabular {
        let goal = n - 1;
        let successors = (0..n)
            .map(|s| {
                (0..2)
                    .map(|a| {
                        if s == goal {
                            vec![(goal as f64, 1.0)]
                        } else {
                            let next = if a == 1 { s + 1 } else { s.saturating_sub(1) };
                            vec![(next as f64, 1.0)]
                        }
                    })
                    .collect()
            })
            .collect();
        Tabular {
            successors,
            spacing: 1.0,
            min: 0.0,
        }
    }

    fn action_pair() -> GridAxes {
        crate::grid::action_box(vec![0.0], vec![1.0], vec![2]).unwrap()
    }

    #[test]
    fn three_state_chain_fixed_point() {
        // Hand-solved: V(goal) = 1/(1-0.5) = 2, then 0.5 * 2 = 1, 0.25 * 2 = 0.5.
        let axes = chain_axes(3);
        let actions = action_pair();
        let transition = chain_transition(3);
        let goal = 2.0;
        let reward = move |s: &[f64], _a: &[f64]| if s[0] == goal { 1.0 } else { 0.0 };
        let problem = MdpProblem {
            state_axes: &axes,
            action_axes: &actions,
            transition: &transition,
            reward: &reward,
            discount: 0.5,
            threshold: 1e-12,
            max_iterations: 200,
            update: UpdateMode::GaussSeidel,
            schedule: SweepSchedule::Alternating,
        };
        let solution = value_iteration(&problem).unwrap();
        assert!(solution.converged);
        let v = solution.values.data();
        assert!((v[0] - 0.5).abs() < 1e-9);
        assert!((v[1] - 1.0).abs() < 1e-9);
        assert!((v[2] - 2.0).abs() < 1e-9);

        // Goal to the right: the policy points right at every non-goal node,
        // and ties at the goal pick action 0.
        let policy = extract_policy(&solution.values, &problem);
        assert_eq!(policy.actions, vec![1, 1, 0]);

        // A threshold above max|R| / (1 - gamma) terminates within 2 sweeps:
        // every per-sweep change is bounded by the value range.
        let loose = MdpProblem { threshold: 1.0 / (1.0 - 0.5) + 1.0, ..problem };
        let solution = value_iteration(&loose).unwrap();
        assert!(solution.converged);
        assert!(solution.iterations <= 2, "took {} sweeps", solution.iterations);
    }

    #[test]
    fn zero_rewards_converge_immediately_to_zero() {
        let axes = chain_axes(5);
        let actions = action_pair();
        let transition = chain_transition(5);
        let reward = |_: &[f64], _: &[f64]| 0.0;
        let problem = MdpProblem {
            state_axes: &axes,
            action_axes: &actions,
            transition: &transition,
            reward: &reward,
            discount: 0.9,
            threshold: 1e-9,
            max_iterations: 10,
            update: UpdateMode::GaussSeidel,
            schedule: SweepSchedule::Alternating,
        };
        let solution = value_iteration(&problem).unwrap();
        assert!(solution.converged);
        assert_eq!(solution.iterations, 1);
        assert!(solution.values.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn myopic_case_maximizes_immediate_reward() {
        let axes = chain_axes(3);
        let actions = action_pair();
        let transition = chain_transition(3);
        // Action-dependent reward; gamma = 0 makes the policy purely greedy.
        let reward = |s: &[f64], a: &[f64]| if s[0] < 1.5 { a[0] } else { 1.0 - a[0] };
        let problem = MdpProblem {
            state_axes: &axes,
            action_axes: &actions,
            transition: &transition,
            reward: &reward,
            discount: 0.0,
            threshold: 1e-9,
            max_iterations: 10,
            update: UpdateMode::GaussSeidel,
            schedule: SweepSchedule::Alternating,
        };
        let solution = value_iteration(&problem).unwrap();
        let policy = extract_policy(&solution.values, &problem);
        assert_eq!(policy.actions, vec![1, 1, 0]);
        // gamma = 0: best value is the best one-step reward.
        assert!(solution.values.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn backup_with_deterministic_transition_and_ties() {
        // Both actions lead to a state worth 10 with zero reward: Q = 9 for
        // each, so the tie-break picks action 0.
        let axes = chain_axes(3);
        let actions = action_pair();
        let transition = Tabular {
            successors: vec![
                vec![vec![(2.0, 1.0)], vec![(2.0, 1.0)]],
                vec![vec![(2.0, 1.0)], vec![(2.0, 1.0)]],
                vec![vec![(2.0, 1.0)], vec![(2.0, 1.0)]],
            ],
            spacing: 1.0,
            min: 0.0,
        };
        let reward = |_: &[f64], _: &[f64]| 0.0;
        let problem = MdpProblem {
            state_axes: &axes,
            action_axes: &actions,
            transition: &transition,
            reward: &reward,
            discount: 0.9,
            threshold: 1e-9,
            max_iterations: 10,
            update: UpdateMode::GaussSeidel,
            schedule: SweepSchedule::Alternating,
        };
        let mut values = vec![0.0, 0.0, 10.0];
        let (q, a) = bellman_backup(&values, &problem, &[0]);
        assert!((q - 9.0).abs() < 1e-12);
        assert_eq!(a, 0);
        // gamma = 0 degenerates to the one-step reward.
        values[2] = 123.0;
        let problem0 = MdpProblem {
            discount: 0.0,
            ..problem
        };
        let (q, _) = bellman_backup(&values, &problem0, &[0]);
        assert_eq!(q, 0.0);
    }

    #[test]
    fn monotone_convergence_with_nonnegative_rewards() {
        let axes = chain_axes(6);
        let actions = action_pair();
        let transition = chain_transition(6);
        let reward = |s: &[f64], _: &[f64]| if s[0] == 5.0 { 1.0 } else { 0.0 };
        let problem = MdpProblem {
            state_axes: &axes,
            action_axes: &actions,
            transition: &transition,
            reward: &reward,
            discount: 0.9,
            threshold: 1e-10,
            max_iterations: 500,
            update: UpdateMode::GaussSeidel,
            schedule: SweepSchedule::Alternating,
        };
        // Re-run iteration by iteration and check pointwise monotonicity.
        let mut previous = vec![0.0; 6];
        for iters in 1..=12 {
            let limited = MdpProblem {
                max_iterations: iters,
                ..problem
            };
            let solution = value_iteration(&limited).unwrap();
            for (p, v) in previous.iter().zip(solution.values.data()) {
                assert!(v >= p, "values must be non-decreasing across sweeps");
            }
            previous = solution.values.data().to_vec();
        }
    }

    #[test]
    fn jacobi_deltas_contract_at_gamma() {
        let axes = chain_axes(8);
        let actions = action_pair();
        let transition = chain_transition(8);
        let reward = |s: &[f64], _: &[f64]| if s[0] == 7.0 { 1.0 } else { 0.0 };
        let problem = MdpProblem {
            state_axes: &axes,
            action_axes: &actions,
            transition: &transition,
            reward: &reward,
            discount: 0.9,
            threshold: 1e-9,
            max_iterations: 300,
            update: UpdateMode::Jacobi,
            schedule: SweepSchedule::Fixed,
        };
        let solution = value_iteration(&problem).unwrap();
        assert!(solution.converged);
        for pair in solution.delta_history.windows(2) {
            if pair[0] > 0.0 {
                assert!(
                    pair[1] <= 0.9 * pair[0] + 1e-9,
                    "{} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn non_convergence_is_flagged() {
        let axes = chain_axes(10);
        let actions = action_pair();
        let transition = chain_transition(10);
        let reward = |s: &[f64], _: &[f64]| if s[0] == 9.0 { 1.0 } else { 0.0 };
        let problem = MdpProblem {
            state_axes: &axes,
            action_axes: &actions,
            transition: &transition,
            reward: &reward,
            discount: 0.9,
            threshold: 1e-12,
            max_iterations: 2,
            update: UpdateMode::GaussSeidel,
            schedule: SweepSchedule::Alternating,
        };
        let solution = value_iteration(&problem).unwrap();
        assert!(!solution.converged);
        assert_eq!(solution.iterations, 2);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let axes = chain_axes(3);
        let actions = action_pair();
        let transition = chain_transition(3);
        let reward = |_: &[f64], _: &[f64]| 0.0;
        let base = MdpProblem {
            state_axes: &axes,
            action_axes: &actions,
            transition: &transition,
            reward: &reward,
            discount: 0.9,
            threshold: 1e-9,
            max_iterations: 10,
            update: UpdateMode::GaussSeidel,
            schedule: SweepSchedule::Alternating,
        };
        assert!(value_iteration(&MdpProblem {
            discount: 1.0,
            ..base
        })
        .is_err());
        assert!(value_iteration(&MdpProblem {
            threshold: 0.0,
            ..base
        })
        .is_err());
        assert!(value_iteration(&MdpProblem {
            max_iterations: 0,
            ..base
        })
        .is_err());
    }
}
