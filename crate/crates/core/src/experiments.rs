//! Scenario library, error norms and refinement studies.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{AnalyticError, AnalyticSolution, InitialProfile};
use crate::network::{standard_topology, ArcId, Network, Topology, TopologyParams};
use crate::solver::{run_simulation, Numerics, SolverError, Trajectory};

/// Default number of stored snapshots, uniform over `[0, T]`.
pub const DEFAULT_SNAPSHOTS: usize = 100;

pub const BUILTIN_NAMES: [&str; 5] = [
    "test1",
    "test2",
    "test3_passive",
    "test4_active",
    "test5_merge",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("unknown scenario {0:?}; expected one of test1, test2, test3_passive, test4_active, test5_merge")]
    UnknownScenario(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub network: Network,
    pub profiles: BTreeMap<ArcId, InitialProfile>,
    pub horizon: f64,
    pub numerics: Numerics,
    pub output_times: Vec<f64>,
}

/// `n` uniform times from 0 to `horizon` inclusive.
pub fn uniform_times(horizon: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![horizon],
        _ => (0..n)
            .map(|k| {
                if k + 1 == n {
                    horizon
                } else {
                    horizon * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

impl Scenario {
    pub fn with_numerics(mut self, numerics: Numerics) -> Self {
        self.numerics = numerics;
        self
    }

    /// Changes the horizon and respaces the outputs uniformly over it.
    pub fn with_horizon(mut self, horizon: f64, snapshots: usize) -> Self {
        self.horizon = horizon;
        self.output_times = uniform_times(horizon, snapshots);
        self
    }

    pub fn with_snapshots(mut self, snapshots: usize) -> Self {
        self.output_times = uniform_times(self.horizon, snapshots);
        self
    }

    pub fn analytic(&self) -> Result<AnalyticSolution, AnalyticError> {
        AnalyticSolution::build(&self.network, &self.profiles, self.horizon)
    }

    pub fn simulate(&self) -> Result<Trajectory, SolverError> {
        run_simulation(self)
    }
}

/// Step sizes used for all builtin scenarios unless overridden.
pub const REFERENCE_NUMERICS: Numerics = Numerics {
    dx: 5e-3,
    dt: 1e-5,
    delta: 1e-2,
};

/// The five conveyor experiments. Incoming arcs carry the reference
/// Gaussian bump; outgoing arcs of diverges and merges start empty.
pub fn builtin_scenario(name: &str) -> Result<Scenario, ExperimentError> {
    let gaussian = InitialProfile::reference_gaussian;
    let (topology, params, horizon, numerics) = match name {
        "test1" => (
            Topology::OneToOne,
            TopologyParams::new(&[1.0, 2.0], &[1.0, 1.0]),
            2.6,
            REFERENCE_NUMERICS,
        ),
        "test2" => (
            Topology::OneToOne,
            TopologyParams::new(&[2.0, 1.0], &[1.0, 1.0]),
            1.7,
            REFERENCE_NUMERICS,
        ),
        "test3_passive" => (
            Topology::DivergePassive,
            TopologyParams::new(&[4.0, 1.0, 2.0], &[1.0; 3]).with_mu(0.5),
            2.0,
            REFERENCE_NUMERICS,
        ),
        "test4_active" => (
            Topology::DivergeActive,
            TopologyParams::new(&[4.0, 1.0, 2.0], &[1.0; 3]).with_mu(0.5),
            2.0,
            REFERENCE_NUMERICS,
        ),
        "test5_merge" => (
            Topology::Merge,
            TopologyParams::new(&[1.0; 3], &[1.0; 3]).with_q(0.3),
            4.0,
            REFERENCE_NUMERICS,
        ),
        other => return Err(ExperimentError::UnknownScenario(other.to_string())),
    };
    let network = standard_topology(topology, &params).expect("builtin parameters are complete");
    let profiles = network
        .arcs
        .keys()
        .map(|id| {
            let feeding = network
                .upstream_junction(id)
                .is_some_and(|j| j.in_arcs.is_empty());
            let one_to_one = topology == Topology::OneToOne;
            let p = if feeding || one_to_one {
                gaussian()
            } else {
                InitialProfile::Zero
            };
            (id.clone(), p)
        })
        .collect();
    Ok(Scenario {
        name: name.to_string(),
        network,
        profiles,
        horizon,
        numerics,
        output_times: uniform_times(horizon, DEFAULT_SNAPSHOTS),
    })
}

/// Time-averaged discrete L2 distance between the stored states and the
/// reference solution sampled at the cell centres:
/// `sqrt((1/N_t) Σ_n Σ_{arcs, j} Δx (ρ̃ − ρ)²)`.
pub fn l2_error(
    trajectory: &Trajectory,
    reference: &AnalyticSolution,
) -> Result<f64, ExperimentError> {
    mean_square_error(trajectory, reference).map(f64::sqrt)
}

/// The square of [`l2_error`]: `(1/N_t) Σ_n Σ_{arcs, j} Δx (ρ̃ − ρ)²`.
/// This is the quantity tabulated in the refinement tables.
pub fn mean_square_error(
    trajectory: &Trajectory,
    reference: &AnalyticSolution,
) -> Result<f64, ExperimentError> {
    mean_square_distance(trajectory, |id, x, t| {
        reference
            .evaluate(id, x, t)
            .ok_or_else(|| ExperimentError::GridMismatch(format!("reference has no arc {id}")))
    })
}

/// Same norm between two trajectories on identical grids and times.
pub fn l2_difference(a: &Trajectory, b: &Trajectory) -> Result<f64, ExperimentError> {
    if a.grids != b.grids || a.states.len() != b.states.len() {
        return Err(ExperimentError::GridMismatch(
            "trajectories differ in grids or snapshot count".into(),
        ));
    }
    if a.states
        .iter()
        .zip(&b.states)
        .any(|(s, r)| s.step != r.step)
    {
        return Err(ExperimentError::GridMismatch(
            "trajectories differ in snapshot times".into(),
        ));
    }
    let mut total = 0.0;
    for (s, r) in a.states.iter().zip(&b.states) {
        for g in &a.grids {
            let (u, v) = (&s.fields[&g.arc_id], &r.fields[&g.arc_id]);
            total += u.iter().zip(v).map(|(p, q)| (p - q).powi(2)).sum::<f64>() * g.dx;
        }
    }
    Ok((total / a.states.len().max(1) as f64).sqrt())
}

fn mean_square_distance(
    trajectory: &Trajectory,
    mut reference: impl FnMut(&ArcId, f64, f64) -> Result<f64, ExperimentError>,
) -> Result<f64, ExperimentError> {
    if trajectory.states.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for state in &trajectory.states {
        for g in &trajectory.grids {
            let field = state
                .fields
                .get(&g.arc_id)
                .filter(|f| f.len() == g.n_cells)
                .ok_or_else(|| {
                    ExperimentError::GridMismatch(format!(
                        "state lacks a field for arc {}",
                        g.arc_id
                    ))
                })?;
            let mut sum = 0.0;
            for (j, &rho) in field.iter().enumerate() {
                let exact = reference(&g.arc_id, g.center(j), state.time)?;
                sum += (rho - exact).powi(2);
            }
            total += sum * g.dx;
        }
    }
    Ok(total / trajectory.states.len() as f64)
}

/// One row of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub dx: f64,
    pub dt: f64,
    pub delta: f64,
    pub l2_error: f64,
    /// `l2_error²`, comparable with the tabulated reference errors.
    pub mean_square_error: f64,
    pub runtime_seconds: f64,
}

fn run_row(
    base: &Scenario,
    reference: &AnalyticSolution,
    numerics: Numerics,
) -> Result<ErrorReport, ExperimentError> {
    let started = Instant::now();
    let trajectory = base.clone().with_numerics(numerics).simulate()?;
    let mean_square_error = mean_square_error(&trajectory, reference)?;
    Ok(ErrorReport {
        dx: numerics.dx,
        dt: numerics.dt,
        delta: numerics.delta,
        l2_error: mean_square_error.sqrt(),
        mean_square_error,
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

fn run_rows(base: &Scenario, rows: Vec<Numerics>) -> Result<Vec<ErrorReport>, ExperimentError> {
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let reference = base.analytic()?;
    rows.into_par_iter()
        .map(|n| run_row(base, &reference, n))
        .collect()
}

/// Errors for a list of `(Δx, Δt)` pairs at the scenario's `δ`, in input order.
pub fn convergence_study(
    base: &Scenario,
    steps: &[(f64, f64)],
) -> Result<Vec<ErrorReport>, ExperimentError> {
    let delta = base.numerics.delta;
    run_rows(
        base,
        steps
            .iter()
            .map(|&(dx, dt)| Numerics { dx, dt, delta })
            .collect(),
    )
}

/// Errors for a list of smoothing widths at fixed `Δx`, `Δt`, in input order.
pub fn smoothing_study(
    base: &Scenario,
    deltas: &[f64],
    dx: f64,
    dt: f64,
) -> Result<Vec<ErrorReport>, ExperimentError> {
    run_rows(
        base,
        deltas
            .iter()
            .map(|&delta| Numerics { dx, dt, delta })
            .collect(),
    )
}

/// Whether the errors never grow by more than `slack` (relative) from one
/// row to the next.
pub fn is_monotone_nonincreasing(reports: &[ErrorReport], slack: f64) -> bool {
    reports
        .windows(2)
        .all(|w| w[1].l2_error <= w[0].l2_error * (1.0 + slack))
}

/// Experimental order of convergence between consecutive rows, in `Δx`.
pub fn observed_orders(reports: &[ErrorReport]) -> Vec<f64> {
    reports
        .windows(2)
        .map(|w| (w[0].l2_error / w[1].l2_error).ln() / (w[0].dx / w[1].dx).ln())
        .collect()
}

/// Relative mass defect of the final state:
/// `|M(T) + outflow − M(0) − inflow| / max(M(0) + inflow, tiny)`.
pub fn mass_audit(trajectory: &Trajectory) -> f64 {
    let first = &trajectory.states[0];
    let last = trajectory.last();
    let m0 = first.mass(&trajectory.grids);
    let m1 = last.mass(&trajectory.grids);
    let scale = (m0 + last.inflow).max(f64::MIN_POSITIVE);
    (m1 + last.outflow - m0 - last.inflow).abs() / scale
}

/// The step-size rows of the grid refinement table.
pub const STEP_STUDY: [(f64, f64); 5] = [
    (0.1, 2e-4),
    (0.05, 1e-4),
    (0.02, 5e-5),
    (0.01, 2e-5),
    (0.005, 1e-5),
];
/// Reference errors for [`STEP_STUDY`], in the units of
/// [`ErrorReport::mean_square_error`].
pub const STEP_STUDY_ERRORS: [f64; 5] = [0.0842, 0.0381, 0.0184, 0.0073, 0.0057];
/// Smoothing widths of the smoothing table, run at `Δx = 5e-3`, `Δt = 2e-6`.
pub const DELTA_STUDY: [f64; 5] = [5e-2, 2e-2, 1e-2, 5e-3, 2e-3];
pub const DELTA_STUDY_ERRORS: [f64; 5] = [0.0051, 0.0042, 0.0039, 0.0037, 0.0035];
pub const DELTA_STUDY_STEPS: (f64, f64) = (5e-3, 2e-6);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        for name in BUILTIN_NAMES {
            let s = builtin_scenario(name).unwrap();
            assert!(s.network.validate().is_empty());
            assert_eq!(s.output_times.len(), DEFAULT_SNAPSHOTS);
            assert_eq!(*s.output_times.last().unwrap(), s.horizon);
        }
        assert!(matches!(
            builtin_scenario("test9"),
            Err(ExperimentError::UnknownScenario(_))
        ));
        let t5 = builtin_scenario("test5_merge").unwrap();
        assert_eq!(t5.profiles[&ArcId::from("3")], InitialProfile::Zero);
    }

    #[test]
    fn uniform_times_include_ends() {
        let t = uniform_times(2.0, 5);
        assert_eq!(t, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(uniform_times(1.0, 0).is_empty());
    }

    #[test]
    fn l2_is_zero_on_exact_samples_and_symmetric() {
        let s = builtin_scenario("test1").unwrap().with_numerics(Numerics {
            dx: 0.1,
            dt: 2e-4,
            delta: 1e-2,
        });
        let s = s.with_horizon(0.2, 3);
        let sol = s.analytic().unwrap();
        let mut traj = s.simulate().unwrap();
        for state in &mut traj.states {
            for g in &traj.grids {
                let f = state.fields.get_mut(&g.arc_id).unwrap();
                for (j, r) in f.iter_mut().enumerate() {
                    *r = sol.evaluate(&g.arc_id, g.center(j), state.time).unwrap();
                }
            }
        }
        assert_eq!(l2_error(&traj, &sol).unwrap(), 0.0);
        let other = s.simulate().unwrap();
        assert_eq!(
            l2_difference(&traj, &other).unwrap(),
            l2_difference(&other, &traj).unwrap()
        );
        assert_eq!(l2_difference(&other, &other).unwrap(), 0.0);
    }

    #[test]
    fn empty_and_single_row_studies() {
        let s = builtin_scenario("test2").unwrap().with_horizon(0.3, 4);
        assert!(convergence_study(&s, &[]).unwrap().is_empty());
        let one = convergence_study(&s, &[(0.1, 2e-4)]).unwrap();
        assert_eq!(one.len(), 1);
        assert!(is_monotone_nonincreasing(&one, 0.0));
    }
}
