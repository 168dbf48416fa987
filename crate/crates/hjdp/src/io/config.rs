//! Problem-specification files: JSON schema, validation, and builders for
//! the runtime objects (grid, target field, dynamics model).
//!
//! Unknown keys are rejected everywhere, and every validation error names
//! the offending config path.

use serde::Deserialize;

use crate::dynamics::{
    DubinsCapture3d, DynamicsModel, Integrator1d, Interval, OptMode, UnderwaterParams,
    UnderwaterTracker6d,
};
use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::grid::{build_grid, GridAxes, GridSpec};
use crate::hj_solver::PdeSolveOptions;
use crate::mdp::UpdateMode;
use crate::numerics::Scheme;
use crate::shapes;
use crate::sweep::SweepSchedule;
use crate::ttr_solver::TtrOptions;

fn err(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses and validates a problem-specification document.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let cfg: ProblemConfig =
        serde_json::from_str(text).map_err(|e| err("<json>", e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub target: Option<ShapeConfig>,
    pub dynamics: DynamicsConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dims: usize,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub counts: Vec<usize>,
    pub periodic: Vec<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    Cylinder {
        ignore_dims: Vec<usize>,
        center: Vec<f64>,
        radius: f64,
    },
    Halfspace {
        dim: usize,
        threshold: f64,
        side: SideConfig,
    },
    Union(Vec<ShapeConfig>),
    Intersection(Vec<ShapeConfig>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideConfig {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Max,
    Min,
}

impl From<ModeConfig> for OptMode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::Max => OptMode::Max,
            ModeConfig::Min => OptMode::Min,
        }
    }
}

fn mode_max() -> ModeConfig {
    ModeConfig::Max
}

fn mode_min() -> ModeConfig {
    ModeConfig::Min
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DynamicsConfig {
    Integrator1d {
        u_max: f64,
        #[serde(default = "mode_max")]
        control_mode: ModeConfig,
    },
    Dubins3d {
        v_a: f64,
        v_b: f64,
        a_max: f64,
        b_max: f64,
        #[serde(default = "mode_max")]
        control_mode: ModeConfig,
        #[serde(default = "mode_min")]
        disturbance_mode: ModeConfig,
    },
    Underwater6d(Box<UnderwaterConfig>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnderwaterConfig {
    pub mass: f64,
    pub mass_displaced: f64,
    pub added_mass_x: f64,
    pub added_mass_z: f64,
    pub drag_x: f64,
    pub drag_xx: f64,
    pub drag_z: f64,
    pub drag_zz: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    #[serde(default)]
    pub flow_vel_x: f64,
    #[serde(default)]
    pub flow_vel_z: f64,
    #[serde(default)]
    pub flow_acc_x: f64,
    #[serde(default)]
    pub flow_acc_z: f64,
    pub thrust_x: [f64; 2],
    pub thrust_z: [f64; 2],
    pub planner_x: [f64; 2],
    pub planner_z: [f64; 2],
    pub dist_x: [f64; 2],
    pub dist_z: [f64; 2],
    pub dist_u: [f64; 2],
    pub dist_w: [f64; 2],
    #[serde(default = "mode_max")]
    pub control_mode: ModeConfig,
    #[serde(default = "mode_min")]
    pub disturbance_mode: ModeConfig,
}

fn default_gravity() -> f64 {
    9.81
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub pde: Option<PdeConfig>,
    #[serde(default)]
    pub ttr: Option<TtrConfig>,
    #[serde(default)]
    pub mdp: Option<MdpConfig>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeConfig {
    #[default]
    Upwind1,
    Eno2,
}

impl From<SchemeConfig> for Scheme {
    fn from(s: SchemeConfig) -> Self {
        match s {
            SchemeConfig::Upwind1 => Scheme::Upwind1,
            SchemeConfig::Eno2 => Scheme::Eno2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleConfig {
    #[default]
    Alternating,
    Fixed,
}

impl From<ScheduleConfig> for SweepSchedule {
    fn from(s: ScheduleConfig) -> Self {
        match s {
            ScheduleConfig::Alternating => SweepSchedule::Alternating,
            ScheduleConfig::Fixed => SweepSchedule::Fixed,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeConfig {
    pub horizon: f64,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default = "default_cfl")]
    pub cfl_factor: f64,
    #[serde(default = "default_true")]
    pub tube_mode: bool,
    #[serde(default)]
    pub save_every: Option<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_divergence")]
    pub divergence_threshold: f64,
}

fn default_cfl() -> f64 {
    0.8
}

fn default_true() -> bool {
    true
}

fn default_divergence() -> f64 {
    1e10
}

impl PdeConfig {
    pub fn to_options(&self) -> PdeSolveOptions {
        PdeSolveOptions {
            horizon: self.horizon,
            scheme: self.scheme.into(),
            cfl_factor: self.cfl_factor,
            tube_mode: self.tube_mode,
            save_every: self.save_every,
            workers: self.workers,
            divergence_threshold: self.divergence_threshold,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TtrConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "default_large_value")]
    pub large_value: f64,
    #[serde(default)]
    pub schedule: ScheduleConfig,
}

fn default_epsilon() -> f64 {
    1e-6
}

fn default_max_sweeps() -> usize {
    1000
}

fn default_large_value() -> f64 {
    100.0
}

impl TtrConfig {
    pub fn to_options(&self) -> TtrOptions {
        TtrOptions {
            epsilon: self.epsilon,
            max_sweeps: self.max_sweeps,
            large_value: self.large_value,
            schedule: self.schedule.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateConfig {
    #[default]
    GaussSeidel,
    Jacobi,
}

impl From<UpdateConfig> for UpdateMode {
    fn from(u: UpdateConfig) -> Self {
        match u {
            UpdateConfig::GaussSeidel => UpdateMode::GaussSeidel,
            UpdateConfig::Jacobi => UpdateMode::Jacobi,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpConfig {
    pub action_grid: ActionGridConfig,
    /// Euler step applied to the dynamics when building transitions.
    pub timestep: f64,
    pub discount: f64,
    pub threshold: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    pub reward: RewardConfig,
    /// Optional stochastic successor list: each entry shifts the Euler
    /// successor by `offset` with the given probability.
    #[serde(default)]
    pub noise: Vec<NoiseConfig>,
    #[serde(default)]
    pub update: UpdateConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
}

fn default_max_iterations() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionGridConfig {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardConfig {
    /// `value` whenever the state lies within `radius` of `center`,
    /// independent of the action; 0 elsewhere.
    Goal {
        center: Vec<f64>,
        radius: f64,
        value: f64,
    },
    /// State-dependent reward tabulated over the state grid, row-major.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub offset: Vec<f64>,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FormatConfig {
    Field,
    Vtk,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    pub dim: usize,
    pub index: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<FormatConfig>,
    /// Pinned indices used when exporting slices of >3D fields.
    #[serde(default)]
    pub slice: Vec<SliceConfig>,
    #[serde(default)]
    pub vtk_ascii: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
            slice: Vec::new(),
            vtk_ascii: false,
        }
    }
}

fn default_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<FormatConfig> {
    vec![FormatConfig::Field]
}

/// A config-selected dynamics model, dispatching to the built-in systems.
#[derive(Debug, Clone)]
pub enum BuiltinModel {
    Integrator(Integrator1d),
    Dubins(DubinsCapture3d),
    Underwater(Box<UnderwaterTracker6d>),
}

macro_rules! delegate {
    ($self:ident, $m:ident ( $($arg:expr),* )) => {
        match $self {
            BuiltinModel::Integrator(m) => m.$m($($arg),*),
            BuiltinModel::Dubins(m) => m.$m($($arg),*),
            BuiltinModel::Underwater(m) => m.$m($($arg),*),
        }
    };
}

impl DynamicsModel for BuiltinModel {
    fn state_dims(&self) -> usize {
        delegate!(self, state_dims())
    }

    fn control_dims(&self) -> usize {
        delegate!(self, control_dims())
    }

    fn disturbance_dims(&self) -> usize {
        delegate!(self, disturbance_dims())
    }

    fn control_mode(&self) -> OptMode {
        delegate!(self, control_mode())
    }

    fn disturbance_mode(&self) -> OptMode {
        delegate!(self, disturbance_mode())
    }

    fn opt_ctrl(&self, x: &[f64], p: &[f64], u: &mut [f64]) {
        delegate!(self, opt_ctrl(x, p, u))
    }

    fn opt_dstb(&self, x: &[f64], p: &[f64], d: &mut [f64]) {
        delegate!(self, opt_dstb(x, p, d))
    }

    fn rate(&self, x: &[f64], u: &[f64], d: &[f64], out: &mut [f64]) {
        delegate!(self, rate(x, u, d, out))
    }

    fn partial_bound(&self, dim: usize, x: &[f64], min_d: &[f64], max_d: &[f64]) -> f64 {
        delegate!(self, partial_bound(dim, x, min_d, max_d))
    }
}

impl ProblemConfig {
    fn validate(&self) -> Result<()> {
        let dims = self.grid.dims;
        for (name, len) in [
            ("grid.mins", self.grid.mins.len()),
            ("grid.maxs", self.grid.maxs.len()),
            ("grid.counts", self.grid.counts.len()),
            ("grid.periodic", self.grid.periodic.len()),
        ] {
            if len != dims {
                return Err(err(name, format!("expected {dims} entries, got {len}")));
            }
        }

        let solver_blocks = self.solver.pde.is_some() as u8
            + self.solver.ttr.is_some() as u8
            + self.solver.mdp.is_some() as u8;
        if solver_blocks != 1 {
            return Err(err(
                "solver",
                "exactly one solver block must be set (pde | ttr | mdp)",
            ));
        }

        let model_dims = match &self.dynamics {
            DynamicsConfig::Integrator1d { .. } => 1,
            DynamicsConfig::Dubins3d { .. } => 3,
            DynamicsConfig::Underwater6d(_) => 6,
        };
        if model_dims != dims {
            return Err(err(
                "dynamics",
                format!("model has {model_dims} state dims, grid has {dims}"),
            ));
        }

        if let Some(target) = &self.target {
            validate_shape(target, dims, "target")?;
        }
        if (self.solver.pde.is_some() || self.solver.ttr.is_some()) && self.target.is_none() {
            return Err(err(
                "target",
                "a target shape is required for pde and ttr solves",
            ));
        }

        if let Some(pde) = &self.solver.pde {
            if !(pde.horizon > 0.0) {
                return Err(err("solver.pde.horizon", "must be > 0"));
            }
            if !(pde.cfl_factor > 0.0 && pde.cfl_factor <= 1.0) {
                return Err(err("solver.pde.cfl_factor", "must be in (0, 1]"));
            }
            if matches!(pde.save_every, Some(s) if s <= 0.0) {
                return Err(err("solver.pde.save_every", "must be > 0"));
            }
        }
        if let Some(ttr) = &self.solver.ttr {
            if !(ttr.epsilon > 0.0) {
                return Err(err("solver.ttr.epsilon", "must be > 0"));
            }
            if ttr.max_sweeps == 0 {
                return Err(err("solver.ttr.max_sweeps", "must be >= 1"));
            }
        }
        if let Some(mdp) = &self.solver.mdp {
            let a = &mdp.action_grid;
            if a.mins.len() != a.counts.len() || a.maxs.len() != a.counts.len() {
                return Err(err(
                    "solver.mdp.action_grid",
                    "mins, maxs, and counts must have equal lengths",
                ));
            }
            if !(mdp.timestep > 0.0) {
                return Err(err("solver.mdp.timestep", "must be > 0"));
            }
            if !(mdp.discount >= 0.0 && mdp.discount < 1.0) {
                return Err(err("solver.mdp.discount", "must be in [0, 1)"));
            }
            if !(mdp.threshold > 0.0) {
                return Err(err("solver.mdp.threshold", "must be > 0"));
            }
            match &mdp.reward {
                RewardConfig::Goal { center, .. } => {
                    if center.len() != dims {
                        return Err(err(
                            "solver.mdp.reward.center",
                            format!("expected {dims} entries, got {}", center.len()),
                        ));
                    }
                }
                RewardConfig::Table(values) => {
                    let total: usize = self.grid.counts.iter().product();
                    if values.len() != total {
                        return Err(err(
                            "solver.mdp.reward.table",
                            format!(
                                "expected {total} entries (one per state node), got {}",
                                values.len()
                            ),
                        ));
                    }
                }
            }
            if !mdp.noise.is_empty() {
                let mut sum = 0.0;
                for (k, n) in mdp.noise.iter().enumerate() {
                    if n.offset.len() != dims {
                        return Err(err(
                            &format!("solver.mdp.noise[{k}].offset"),
                            format!("expected {dims} entries, got {}", n.offset.len()),
                        ));
                    }
                    if n.probability < 0.0 {
                        return Err(err(
                            &format!("solver.mdp.noise[{k}].probability"),
                            "must be >= 0",
                        ));
                    }
                    sum += n.probability;
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(err(
                        "solver.mdp.noise",
                        format!("probabilities sum to {sum}, expected 1"),
                    ));
                }
            }
        }

        for (k, s) in self.output.slice.iter().enumerate() {
            if s.dim >= dims {
                return Err(err(
                    &format!("output.slice[{k}].dim"),
                    format!("out of range for a {dims}-dim grid"),
                ));
            }
            if s.index >= self.grid.counts[s.dim] {
                return Err(err(
                    &format!("output.slice[{k}].index"),
                    format!("out of range ({} nodes)", self.grid.counts[s.dim]),
                ));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(
            self.grid.mins.clone(),
            self.grid.maxs.clone(),
            self.grid.counts.clone(),
            self.grid.periodic.clone(),
        )
    }

    pub fn build_axes(&self) -> Result<GridAxes> {
        build_grid(self.grid_spec())
    }

    pub fn build_target(&self, axes: &GridAxes) -> Result<ValueField> {
        let shape = self
            .target
            .as_ref()
            .ok_or_else(|| err("target", "a target shape is required"))?;
        build_shape(shape, axes)
    }

    pub fn build_model(&self) -> BuiltinModel {
        match &self.dynamics {
            DynamicsConfig::Integrator1d {
                u_max,
                control_mode,
            } => BuiltinModel::Integrator(Integrator1d::new(*u_max, (*control_mode).into())),
            DynamicsConfig::Dubins3d {
                v_a,
                v_b,
                a_max,
                b_max,
                control_mode,
                disturbance_mode,
            } => BuiltinModel::Dubins(
                DubinsCapture3d::new(*v_a, *v_b, *a_max, *b_max)
                    .with_modes((*control_mode).into(), (*disturbance_mode).into()),
            ),
            DynamicsConfig::Underwater6d(c) => {
                let range = |r: &[f64; 2]| Interval::new(r[0], r[1]);
                let params = UnderwaterParams {
                    mass: c.mass,
                    mass_displaced: c.mass_displaced,
                    added_mass_x: c.added_mass_x,
                    added_mass_z: c.added_mass_z,
                    drag_x: c.drag_x,
                    drag_xx: c.drag_xx,
                    drag_z: c.drag_z,
                    drag_zz: c.drag_zz,
                    gravity: c.gravity,
                    flow_vel_x: c.flow_vel_x,
                    flow_vel_z: c.flow_vel_z,
                    flow_acc_x: c.flow_acc_x,
                    flow_acc_z: c.flow_acc_z,
                    thrust_x: range(&c.thrust_x),
                    thrust_z: range(&c.thrust_z),
                    planner_x: range(&c.planner_x),
                    planner_z: range(&c.planner_z),
                    dist_x: range(&c.dist_x),
                    dist_z: range(&c.dist_z),
                    dist_u: range(&c.dist_u),
                    dist_w: range(&c.dist_w),
                };
                BuiltinModel::Underwater(Box::new(
                    UnderwaterTracker6d::new(params)
                        .with_modes(c.control_mode.into(), c.disturbance_mode.into()),
                ))
            }
        }
    }
}

fn validate_shape(shape: &ShapeConfig, dims: usize, path: &str) -> Result<()> {
    match shape {
        ShapeConfig::Sphere { center, radius } => {
            if center.len() != dims {
                return Err(err(
                    &format!("{path}.center"),
                    format!("expected {dims} entries, got {}", center.len()),
                ));
            }
            if *radius <= 0.0 {
                return Err(err(&format!("{path}.radius"), "must be > 0"));
            }
        }
        ShapeConfig::Cylinder {
            ignore_dims,
            center,
            radius,
        } => {
            for d in ignore_dims {
                if *d >= dims {
                    return Err(err(
                        &format!("{path}.ignore_dims"),
                        format!("dim {d} out of range for a {dims}-dim grid"),
                    ));
                }
            }
            let kept = dims - ignore_dims.len();
            if kept == 0 {
                return Err(err(
                    &format!("{path}.ignore_dims"),
                    "must keep at least one dim",
                ));
            }
            if center.len() != kept {
                return Err(err(
                    &format!("{path}.center"),
                    format!(
                        "expected {kept} entries (one per kept dim), got {}",
                        center.len()
                    ),
                ));
            }
            if *radius <= 0.0 {
                return Err(err(&format!("{path}.radius"), "must be > 0"));
            }
        }
        ShapeConfig::Halfspace { dim, .. } => {
            if *dim >= dims {
                return Err(err(
                    &format!("{path}.dim"),
                    format!("out of range for a {dims}-dim grid"),
                ));
            }
        }
        ShapeConfig::Union(parts) | ShapeConfig::Intersection(parts) => {
            if parts.is_empty() {
                return Err(err(path, "combinator needs at least one shape"));
            }
            for (k, part) in parts.iter().enumerate() {
                validate_shape(part, dims, &format!("{path}[{k}]"))?;
            }
        }
    }
    Ok(())
}

fn build_shape(shape: &ShapeConfig, axes: &GridAxes) -> Result<ValueField> {
    match shape {
        ShapeConfig::Sphere { center, radius } => shapes::sphere_sdf(axes, center, *radius),
        ShapeConfig::Cylinder {
            ignore_dims,
            center,
            radius,
        } => shapes::cylinder_sdf(axes, ignore_dims, center, *radius),
        ShapeConfig::Halfspace {
            dim,
            threshold,
            side,
        } => {
            let side = match side {
                SideConfig::Lower => shapes::HalfspaceSide::Lower,
                SideConfig::Upper => shapes::HalfspaceSide::Upper,
            };
            shapes::halfspace_sdf(axes, *dim, *threshold, side)
        }
        ShapeConfig::Union(parts) => {
            let mut acc = build_shape(&parts[0], axes)?;
            for part in &parts[1..] {
                acc = shapes::union_fields(&acc, &build_shape(part, axes)?)?;
            }
            Ok(acc)
        }
        ShapeConfig::Intersection(parts) => {
            let mut acc = build_shape(&parts[0], axes)?;
            for part in &parts[1..] {
                acc = shapes::intersect_fields(&acc, &build_shape(part, axes)?)?;
            }
            Ok(acc)
        }
    }
}
