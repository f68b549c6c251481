//! Command-line front end for beltflow.
//!
//! Subcommands: `simulate`, `analytic`, `compare`, `convergence`, `validate`.

pub mod config;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use beltflow::analytic::{AnalyticError, AnalyticSolution};
use beltflow::experiments::{
    convergence_study, l2_error, mean_square_error, smoothing_study, ExperimentError, Scenario,
};
use beltflow::network::ArcId;
use beltflow::solver::{output_steps, ArcGrid, NetworkState, SolverError, Trajectory};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{Overrides, ScenarioFile, StudyTable};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("initial profile on arc {arc} spans [{min}, {max}], outside [0, {capacity}]")]
    ProfileBounds {
        arc: ArcId,
        min: f64,
        max: f64,
        capacity: f64,
    },
    #[error("CFL violation: dt={dt:e} exceeds the limit {max:e}")]
    Cfl { dt: f64, max: f64 },
    #[error("no analytic oracle: {0}")]
    NoOracle(String),
    #[error("solver error: {0}")]
    Solver(#[from] SolverError),
    #[error("analytic error: {0}")]
    Analytic(AnalyticError),
    #[error("study error: {0}")]
    Experiment(#[from] ExperimentError),
    #[error("io error: {0}")]
    Io(String),
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::NoOracle(m) => CliError::NoOracle(m),
            other => CliError::Analytic(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "beltflow", version, about = "Conveyor-belt network simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the finite-volume scheme and export the fields.
    Simulate(RunArgs),
    /// Evaluate the semi-analytic solution on the simulation grid.
    Analytic(RunArgs),
    /// Run both and export the pointwise difference and the L2 error.
    Compare(RunArgs),
    /// Run the refinement study of a study file.
    Convergence(RunArgs),
    /// Check a scenario without running it.
    Validate(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario or study file (TOML).
    #[arg(
        long,
        conflicts_with = "scenario",
        required_unless_present = "scenario"
    )]
    pub config: Option<PathBuf>,
    /// Builtin scenario: test1, test2, test3_passive, test4_active, test5_merge.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Number of uniform snapshots over [0, horizon].
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write one space-time graymap per arc.
    #[arg(long)]
    pub raster: bool,
    /// Worker threads for studies.
    #[arg(long, env = "BELTFLOW_THREADS")]
    pub threads: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            dx: self.dx,
            dt: self.dt,
            delta: self.delta,
            horizon: self.horizon,
            snapshots: self.snapshots,
        }
    }

    fn file(&self) -> Result<ScenarioFile, CliError> {
        match (&self.config, &self.scenario) {
            (Some(path), _) => config::read_file(path),
            (None, Some(name)) => config::parse_file_text(&format!("base = {name:?}")),
            (None, None) => Err(CliError::Config(
                "one of --config or --scenario is required".into(),
            )),
        }
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        config::resolve(&self.file()?, &self.overrides())
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn write_rasters(
    args: &RunArgs,
    s: &Scenario,
    grids: &[ArcGrid],
    states: &[NetworkState],
    stem: &str,
) -> Result<(), CliError> {
    if !args.raster {
        return Ok(());
    }
    for g in grids {
        let upper = s.network.arcs[&g.arc_id].capacity + s.numerics.delta;
        write(
            &args.out,
            &format!("{stem}_{}.pgm", g.arc_id),
            &output::raster_pgm(g, states, upper),
        )?;
    }
    Ok(())
}

/// Oracle sampled at the cell centres and snapshot times the solver would use.
fn analytic_states(
    s: &Scenario,
    exact: &AnalyticSolution,
) -> Result<(Vec<ArcGrid>, Vec<NetworkState>), CliError> {
    let grids: Vec<ArcGrid> = s
        .network
        .arcs
        .values()
        .map(|a| ArcGrid::new(a, s.numerics.dx))
        .collect();
    let states = output_steps(&s.output_times, s.numerics.dt)
        .into_iter()
        .map(|step| {
            let t = step as f64 * s.numerics.dt;
            let fields = grids
                .iter()
                .map(|g| {
                    let v = (0..g.n_cells)
                        .map(|j| {
                            exact
                                .evaluate(&g.arc_id, g.center(j), t)
                                .ok_or_else(|| CliError::NoOracle(format!("arc {}", g.arc_id)))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok((g.arc_id.clone(), v))
                })
                .collect::<Result<_, CliError>>()?;
            Ok(NetworkState {
                step,
                time: t,
                fields,
                inflow: 0.0,
                outflow: 0.0,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((grids, states))
}

fn simulate(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.scenario()?;
    let traj = s.simulate()?;
    let path = write(
        &args.out,
        "fields.csv",
        output::fields_csv(&traj.grids, &traj.states).as_bytes(),
    )?;
    write_rasters(args, &s, &traj.grids, &traj.states, "raster")?;
    let _ = writeln!(
        out,
        "{}: {} snapshots to t={} written to {}; mass defect {:.2e}",
        s.name,
        traj.states.len(),
        traj.last().time,
        path.display(),
        beltflow::experiments::mass_audit(&traj)
    );
    Ok(())
}

fn analytic(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.scenario()?;
    let exact = s.analytic()?;
    let (grids, states) = analytic_states(&s, &exact)?;
    let path = write(
        &args.out,
        "analytic.csv",
        output::fields_csv(&grids, &states).as_bytes(),
    )?;
    write_rasters(args, &s, &grids, &states, "analytic")?;
    for g in exact.interfaces() {
        let _ = writeln!(
            out,
            "congestion on arc {}: t_start={} t_end={}",
            g.arc, g.window.t_start, g.window.t_end
        );
    }
    let _ = writeln!(out, "{}: oracle written to {}", s.name, path.display());
    Ok(())
}

fn compare(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.scenario()?;
    // refuse before spending time on the simulation
    let exact = s.analytic()?;
    let traj: Trajectory = s.simulate()?;
    let mut rows = Vec::new();
    for state in &traj.states {
        for g in &traj.grids {
            for (j, &rho) in state.fields[&g.arc_id].iter().enumerate() {
                let x = g.center(j);
                let e = exact
                    .evaluate(&g.arc_id, x, state.time)
                    .ok_or_else(|| CliError::NoOracle(format!("arc {}", g.arc_id)))?;
                rows.push((g.arc_id.to_string(), x, state.time, rho, e));
            }
        }
    }
    write(
        &args.out,
        "compare.csv",
        output::compare_csv(&rows).as_bytes(),
    )?;
    let e = l2_error(&traj, &exact)?;
    let e2 = mean_square_error(&traj, &exact)?;
    let _ = writeln!(out, "l2_error={e}");
    let _ = writeln!(out, "mean_square_error={e2}");
    Ok(())
}

fn convergence(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = args.file()?;
    let study = file
        .study
        .clone()
        .ok_or_else(|| CliError::Config("study file needs a [study] table".into()))?;
    let base = config::resolve(&file, &args.overrides())?;
    let run = || match &study {
        StudyTable::Steps { rows } => convergence_study(&base, rows),
        StudyTable::Smoothing { deltas, dx, dt } => smoothing_study(&base, deltas, *dx, *dt),
    };
    let reports = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }?;
    let path = write(
        &args.out,
        "study.csv",
        output::study_csv(&reports).as_bytes(),
    )?;
    for r in &reports {
        let _ = writeln!(
            out,
            "dx={} dt={} delta={} l2_error={:.4e} mean_square_error={:.4e}",
            r.dx, r.dt, r.delta, r.l2_error, r.mean_square_error
        );
    }
    let _ = writeln!(out, "{} rows written to {}", reports.len(), path.display());
    Ok(())
}

fn validate(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.scenario()?;
    let report = s.network.validate();
    for note in &report.notes {
        let _ = writeln!(out, "note: {}: {}", note.locus, note.message);
    }
    let limit = beltflow::flux::cfl_max_timestep(&s.network, s.numerics.delta, s.numerics.dx);
    let _ = writeln!(
        out,
        "ok: {} with {} arcs, {} junctions; dt={} (limit {limit}), horizon {}",
        s.name,
        s.network.arcs.len(),
        s.network.junctions.len(),
        s.numerics.dt,
        s.horizon
    );
    Ok(())
}

/// Runs a parsed command, writing the summary to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Analytic(a) => analytic(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Convergence(a) => convergence(a, out),
        Command::Validate(a) => validate(a, out),
    }
}
