//! Command-line interface: solve reachability, time-to-reach, and value
//! iteration problems from JSON specification files, and export stored
//! fields for external viewers.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use hjdp::error::Error;
use hjdp::grid::{action_box, build_grid, GridAxes};
use hjdp::io::config::{parse_config, FormatConfig, ProblemConfig, RewardConfig, SliceConfig};
use hjdp::io::{container, export};
use hjdp::mdp::{self, EulerTransition, MdpProblem};
use hjdp::numerics::Scheme;
use hjdp::ttr_solver;
use hjdp::{hj_solver, ValueField};

#[derive(Parser)]
#[command(
    name = "hjdp",
    version,
    about = "Grid-based dynamic programming: HJ reachability, time-to-reach, and value iteration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the time-dependent HJ PDE for a backward reachable set or tube
    SolvePde {
        /// Problem specification file (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config)
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads (overrides the config)
        #[arg(long)]
        threads: Option<usize>,
        /// Derivative scheme (overrides the config)
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Checkpoint interval in time units (overrides the config)
        #[arg(long)]
        save_every: Option<f64>,
        /// Print peak memory and wall-clock statistics
        #[arg(long)]
        stats: bool,
    },
    /// Solve the stationary time-to-reach PDE by Lax-Friedrichs sweeping
    SolveTtr {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Convergence threshold (overrides the config)
        #[arg(long)]
        epsilon: Option<f64>,
        /// Sweep limit (overrides the config)
        #[arg(long)]
        max_sweeps: Option<usize>,
        #[arg(long)]
        stats: bool,
    },
    /// Run value iteration for the configured MDP
    ValueIter {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        stats: bool,
    },
    /// Convert a stored field container to VTK or CSV
    Export {
        /// Field container file
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        /// Output path (defaults to the input with the format's extension)
        #[arg(long)]
        output: Option<PathBuf>,
        /// Pinned indices for slicing, e.g. "2=15" or "3=0,4=12,5=7"
        #[arg(long)]
        slice: Option<String>,
        /// ASCII VTK payload instead of binary
        #[arg(long)]
        ascii: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Upwind1,
    Eno2,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Vtk,
    Csv,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run() -> Result<ExitCode, Error> {
    match Cli::parse().command {
        Command::SolvePde {
            config,
            output,
            threads,
            scheme,
            save_every,
            stats,
        } => {
            let cfg = load_config(&config)?;
            run_pde(cfg, output, threads, scheme, save_every, stats)
        }
        Command::SolveTtr {
            config,
            output,
            epsilon,
            max_sweeps,
            stats,
        } => {
            let cfg = load_config(&config)?;
            run_ttr(cfg, output, epsilon, max_sweeps, stats)
        }
        Command::ValueIter {
            config,
            output,
            stats,
        } => {
            let cfg = load_config(&config)?;
            run_value_iter(cfg, output, stats)
        }
        Command::Export {
            input,
            format,
            output,
            slice,
            ascii,
        } => run_export(&input, format, output, slice, ascii),
    }
}

fn load_config(path: &Path) -> Result<ProblemConfig, Error> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

fn run_pde(
    cfg: ProblemConfig,
    output: Option<PathBuf>,
    threads: Option<usize>,
    scheme: Option<SchemeArg>,
    save_every: Option<f64>,
    stats: bool,
) -> Result<ExitCode, Error> {
    let pde = cfg
        .solver
        .pde
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("config has no pde solver block".into()))?;
    let mut options = pde.to_options();
    if let Some(t) = threads {
        options.workers = Some(t);
    }
    if let Some(s) = scheme {
        options.scheme = match s {
            SchemeArg::Upwind1 => Scheme::Upwind1,
            SchemeArg::Eno2 => Scheme::Eno2,
        };
    }
    if let Some(interval) = save_every {
        options.save_every = Some(interval);
    }

    let axes = cfg.build_axes()?;
    let target = cfg.build_target(&axes)?;
    let model = cfg.build_model();

    let started = Instant::now();
    let solution = hj_solver::solve_pde(target, &axes, &model, &options)?;
    let elapsed = started.elapsed().as_secs_f64();

    let out_dir = output.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&out_dir)?;
    let spec = cfg.grid_spec();
    let n = solution.checkpoints.len();
    for (k, field) in solution.checkpoints[..n - 1].iter().enumerate() {
        container::write_field_file(
            &out_dir.join(format!("checkpoint_{k:03}.field")),
            &spec,
            field,
        )?;
    }
    let final_field = solution.final_field();
    if cfg.output.formats.contains(&FormatConfig::Field) {
        container::write_field_file(&out_dir.join("final.field"), &spec, final_field)?;
    }
    write_exports(&cfg, &axes, final_field, &out_dir, "final")?;

    println!("nodes={}", final_field.len());
    println!("steps={}", solution.steps);
    println!("final_time={}", final_field.time());
    println!("checkpoints={n}");
    println!("output={}", out_dir.display());
    if stats {
        print_stats(elapsed);
    }
    Ok(ExitCode::SUCCESS)
}

fn run_ttr(
    cfg: ProblemConfig,
    output: Option<PathBuf>,
    epsilon: Option<f64>,
    max_sweeps: Option<usize>,
    stats: bool,
) -> Result<ExitCode, Error> {
    let ttr = cfg
        .solver
        .ttr
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("config has no ttr solver block".into()))?;
    let mut options = ttr.to_options();
    if let Some(e) = epsilon {
        options.epsilon = e;
    }
    if let Some(k) = max_sweeps {
        options.max_sweeps = k;
    }

    let axes = cfg.build_axes()?;
    let target = cfg.build_target(&axes)?;
    let model = cfg.build_model();

    let started = Instant::now();
    let solution = ttr_solver::solve_ttr(&target, &axes, &model, &options)?;
    let elapsed = started.elapsed().as_secs_f64();

    let out_dir = output.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&out_dir)?;
    if cfg.output.formats.contains(&FormatConfig::Field) {
        container::write_field_file(
            &out_dir.join("ttr.field"),
            &cfg.grid_spec(),
            &solution.field,
        )?;
    }
    write_exports(&cfg, &axes, &solution.field, &out_dir, "ttr")?;

    println!("nodes={}", solution.field.len());
    println!("sweeps={}", solution.sweeps);
    println!("final_change={:e}", solution.final_change);
    println!("converged={}", solution.converged);
    println!("output={}", out_dir.display());
    if stats {
        print_stats(elapsed);
    }
    if !solution.converged {
        eprintln!(
            "warning: not converged after {} sweeps (last change {:e} >= epsilon {:e})",
            solution.sweeps, solution.final_change, options.epsilon
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

type RewardFn = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

fn run_value_iter(
    cfg: ProblemConfig,
    output: Option<PathBuf>,
    stats: bool,
) -> Result<ExitCode, Error> {
    let mdp_cfg = cfg
        .solver
        .mdp
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("config has no mdp solver block".into()))?;

    let state_axes = cfg.build_axes()?;
    let action_axes = action_box(
        mdp_cfg.action_grid.mins.clone(),
        mdp_cfg.action_grid.maxs.clone(),
        mdp_cfg.action_grid.counts.clone(),
    )?;
    let model = cfg.build_model();
    let noise: Vec<(Vec<f64>, f64)> = mdp_cfg
        .noise
        .iter()
        .map(|n| (n.offset.clone(), n.probability))
        .collect();
    let transition = EulerTransition::new(model, mdp_cfg.timestep).with_noise(noise);

    let reward: RewardFn = match &mdp_cfg.reward {
        RewardConfig::Goal {
            center,
            radius,
            value,
        } => {
            let (center, radius, value) = (center.clone(), *radius, *value);
            Box::new(move |s: &[f64], _a: &[f64]| {
                let sq: f64 = s.iter().zip(&center).map(|(x, c)| (x - c) * (x - c)).sum();
                if sq.sqrt() <= radius {
                    value
                } else {
                    0.0
                }
            })
        }
        RewardConfig::Table(values) => {
            let values = values.clone();
            let axes = cfg.build_axes()?;
            Box::new(move |s: &[f64], _a: &[f64]| {
                let mut idx = [0usize; hjdp::grid::MAX_DIMS];
                hjdp::grid::nearest_index(&axes, s, &mut idx[..axes.dims()]);
                values[axes.flat_index(&idx[..axes.dims()])]
            })
        }
    };

    let problem = MdpProblem {
        state_axes: &state_axes,
        action_axes: &action_axes,
        transition: &transition,
        reward: &*reward,
        discount: mdp_cfg.discount,
        threshold: mdp_cfg.threshold,
        max_iterations: mdp_cfg.max_iterations,
        update: mdp_cfg.update.into(),
        schedule: mdp_cfg.schedule.into(),
    };

    let started = Instant::now();
    let solution = mdp::value_iteration(&problem)?;
    let elapsed = started.elapsed().as_secs_f64();
    let policy = mdp::extract_policy(&solution.values, &problem);

    let out_dir = output.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&out_dir)?;
    if cfg.output.formats.contains(&FormatConfig::Field) {
        container::write_field_file(
            &out_dir.join("values.field"),
            &cfg.grid_spec(),
            &solution.values,
        )?;
    }
    write_policy_csv(
        &out_dir.join("policy.csv"),
        &state_axes,
        &action_axes,
        &policy,
    )?;
    write_exports(&cfg, &state_axes, &solution.values, &out_dir, "values")?;

    println!("states={}", solution.values.len());
    println!("actions={}", action_axes.total_nodes());
    println!("iterations={}", solution.iterations);
    println!("final_delta={:e}", solution.final_delta);
    println!("converged={}", solution.converged);
    println!("output={}", out_dir.display());
    if stats {
        print_stats(elapsed);
    }
    if !solution.converged {
        eprintln!(
            "warning: not converged after {} iterations (last delta {:e} >= threshold {:e})",
            solution.iterations, solution.final_delta, mdp_cfg.threshold
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn write_policy_csv(
    path: &Path,
    state_axes: &GridAxes,
    action_axes: &GridAxes,
    policy: &mdp::PolicyField,
) -> Result<(), Error> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    let sdims = state_axes.dims();
    let adims = action_axes.dims();
    let mut header: Vec<String> = (0..sdims).map(|d| format!("x{d}")).collect();
    header.push("action_index".into());
    header.extend((0..adims).map(|d| format!("u{d}")));
    writeln!(w, "{}", header.join(","))?;

    let mut sidx = vec![0usize; sdims];
    let mut aidx = vec![0usize; adims];
    for flat in 0..policy.actions.len() {
        state_axes.multi_index(flat, &mut sidx);
        for (d, i) in sidx.iter().enumerate() {
            write!(w, "{},", state_axes.coords(d)[*i])?;
        }
        let a = policy.actions[flat];
        write!(w, "{a}")?;
        action_axes.multi_index(a, &mut aidx);
        for (d, i) in aidx.iter().enumerate() {
            write!(w, ",{}", action_axes.coords(d)[*i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_exports(
    cfg: &ProblemConfig,
    axes: &GridAxes,
    field: &ValueField,
    out_dir: &Path,
    stem: &str,
) -> Result<(), Error> {
    let fixed: Vec<(usize, usize)> = cfg
        .output
        .slice
        .iter()
        .map(|SliceConfig { dim, index }| (*dim, *index))
        .collect();
    if cfg.output.formats.contains(&FormatConfig::Vtk) {
        let mut w = std::io::BufWriter::new(fs::File::create(out_dir.join(format!("{stem}.vtk")))?);
        export::export_vtk(&mut w, axes, field, &fixed, cfg.output.vtk_ascii)?;
    }
    if cfg.output.formats.contains(&FormatConfig::Csv) {
        let mut w = std::io::BufWriter::new(fs::File::create(out_dir.join(format!("{stem}.csv")))?);
        export::export_csv_slice(&mut w, axes, field, &fixed)?;
    }
    Ok(())
}

fn run_export(
    input: &Path,
    format: FormatArg,
    output: Option<PathBuf>,
    slice: Option<String>,
    ascii: bool,
) -> Result<ExitCode, Error> {
    let (spec, field) = container::read_field_file(input)?;
    let axes = build_grid(spec)?;
    let fixed = parse_slice(slice.as_deref())?;
    let extension = match format {
        FormatArg::Vtk => "vtk",
        FormatArg::Csv => "csv",
    };
    let out_path = output.unwrap_or_else(|| input.with_extension(extension));
    let mut w = std::io::BufWriter::new(fs::File::create(&out_path)?);
    match format {
        FormatArg::Vtk => export::export_vtk(&mut w, &axes, &field, &fixed, ascii)?,
        FormatArg::Csv => export::export_csv_slice(&mut w, &axes, &field, &fixed)?,
    }
    println!("output={}", out_path.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_slice(text: Option<&str>) -> Result<Vec<(usize, usize)>, Error> {
    let Some(text) = text else {
        return Ok(Vec::new());
    };
    let mut fixed = Vec::new();
    for part in text.split(',') {
        let (dim, index) = part.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("bad slice entry `{part}`, expected dim=index"))
        })?;
        let dim = dim
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad slice dim `{dim}`")))?;
        let index = index
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad slice index `{index}`")))?;
        fixed.push((dim, index));
    }
    Ok(fixed)
}

/// Peak resident set size from /proc/self/status, in MiB.
fn peak_rss_mib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024)
}

fn print_stats(elapsed: f64) {
    println!("elapsed_s={elapsed:.3}");
    if let Some(mib) = peak_rss_mib() {
        println!("peak_rss_mib={mib}");
    }
}
