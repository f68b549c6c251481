//! Explicit first-order finite-volume scheme on a belt network.
//!
//! Interior interfaces use the Godunov flux of the regularized flux; arc ends
//! take the junction fluxes of [`coupling`]. Each step updates
//! `ρ_j ← ρ_j − Δt/Δx·(F_{j+1/2} − F_{j−1/2})`.

pub mod coupling;
pub mod grid;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::InitialProfile;
use crate::experiments::Scenario;
use crate::flux::{cfl_max_timestep, FluxError, FluxParams};
use crate::network::{ArcId, Inflow, JunctionKind, Network};

pub use coupling::{
    junction_fluxes_diverge, junction_fluxes_merge, junction_fluxes_one_to_one, JunctionFluxes,
};
pub use grid::ArcGrid;

use grid::ArcCells;

/// Relative slack on the time step bound and absolute slack on the density
/// bounds, both for round-off.
const CFL_SLACK: f64 = 1e-12;
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub dx: f64,
    pub dt: f64,
    pub delta: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid numerics: {0}")]
    InvalidNumerics(String),
    #[error("time step {dt} exceeds the CFL bound; need dt <= {max}")]
    Cfl { dt: f64, max: f64 },
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error("no initial profile for arc {0}")]
    MissingProfile(ArcId),
    #[error("initial density {value} on arc {arc} at x={x} outside [0, {upper}]")]
    InitialBounds {
        arc: ArcId,
        x: f64,
        value: f64,
        upper: f64,
    },
    #[error("numeric fault on arc {arc} cell {cell} at t={t}: density {value}")]
    NumericFault {
        arc: ArcId,
        cell: usize,
        t: f64,
        value: f64,
    },
}

/// Cell averages on every arc at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub step: u64,
    pub time: f64,
    pub fields: BTreeMap<ArcId, Vec<f64>>,
    /// Mass that entered through sources since `t = 0`.
    pub inflow: f64,
    /// Mass that left through sinks since `t = 0`.
    pub outflow: f64,
}

impl NetworkState {
    pub fn mass(&self, grids: &[ArcGrid]) -> f64 {
        grids
            .iter()
            .map(|g| self.fields[&g.arc_id].iter().sum::<f64>() * g.dx)
            .sum()
    }
}

/// Stored states of one run together with the grids they live on.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grids: Vec<ArcGrid>,
    pub states: Vec<NetworkState>,
}

impl Trajectory {
    pub fn grid(&self, id: &ArcId) -> Option<&ArcGrid> {
        self.grids.iter().find(|g| &g.arc_id == id)
    }

    pub fn last(&self) -> &NetworkState {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// Junction wiring resolved to arc indices.
#[derive(Debug, Clone)]
enum Plan {
    Source {
        out: usize,
        inflow: Inflow,
    },
    Sink {
        inc: usize,
    },
    OneToOne {
        inc: usize,
        out: usize,
    },
    Diverge {
        inc: usize,
        out: [usize; 2],
        mu: f64,
        active: bool,
    },
    Merge {
        inc: [usize; 2],
        out: usize,
        q: f64,
    },
}

/// Time-stepping state for one network.
#[derive(Debug, Clone)]
pub struct Simulator {
    numerics: Numerics,
    arcs: Vec<ArcCells>,
    plans: Vec<Plan>,
    h_in: Vec<f64>,
    h_out: Vec<f64>,
    step: u64,
    inflow: f64,
    outflow: f64,
    congested: Vec<bool>,
}

impl Simulator {
    pub fn new(
        network: &Network,
        profiles: &BTreeMap<ArcId, InitialProfile>,
        numerics: Numerics,
    ) -> Result<Self, SolverError> {
        let report = network.validate();
        if !report.is_empty() {
            return Err(SolverError::InvalidNetwork(report.to_string()));
        }
        let Numerics { dx, dt, delta } = numerics;
        for (name, v) in [("dx", dx), ("dt", dt), ("delta", delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::InvalidNumerics(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let max = cfl_max_timestep(network, delta, dx);
        if dt > max * (1.0 + CFL_SLACK) {
            return Err(SolverError::Cfl { dt, max });
        }

        let mut arcs = Vec::with_capacity(network.arcs.len());
        let mut index = BTreeMap::new();
        for (k, arc) in network.arcs.values().enumerate() {
            let grid = ArcGrid::new(arc, dx);
            let profile = profiles
                .get(&arc.id)
                .ok_or_else(|| SolverError::MissingProfile(arc.id.clone()))?;
            let flux = FluxParams::new(arc.velocity, arc.capacity, delta)?;
            let rho: Vec<f64> = grid
                .cell_centers()
                .iter()
                .map(|&x| profile.value(x))
                .collect();
            if let Some((j, &value)) = rho
                .iter()
                .enumerate()
                .find(|(_, &v)| !(0.0..=arc.capacity).contains(&v))
            {
                return Err(SolverError::InitialBounds {
                    arc: arc.id.clone(),
                    x: grid.center(j),
                    value,
                    upper: arc.capacity,
                });
            }
            index.insert(arc.id.clone(), k);
            arcs.push(ArcCells { grid, flux, rho });
        }

        let at = |id: &ArcId| index[id];
        let plans = network
            .junctions
            .iter()
            .map(|j| match j.kind {
                JunctionKind::Source => Plan::Source {
                    out: at(&j.out_arcs[0]),
                    inflow: j.inflow.clone().unwrap_or_default(),
                },
                JunctionKind::Sink => Plan::Sink {
                    inc: at(&j.in_arcs[0]),
                },
                JunctionKind::OneToOne => Plan::OneToOne {
                    inc: at(&j.in_arcs[0]),
                    out: at(&j.out_arcs[0]),
                },
                JunctionKind::DivergePassive | JunctionKind::DivergeActive => Plan::Diverge {
                    inc: at(&j.in_arcs[0]),
                    out: [at(&j.out_arcs[0]), at(&j.out_arcs[1])],
                    mu: j.mu.unwrap_or(1.0),
                    active: j.kind == JunctionKind::DivergeActive,
                },
                JunctionKind::Merge => Plan::Merge {
                    inc: [at(&j.in_arcs[0]), at(&j.in_arcs[1])],
                    out: at(&j.out_arcs[0]),
                    q: j.q.unwrap_or(0.5),
                },
            })
            .collect::<Vec<_>>();

        let n = arcs.len();
        let n_junctions = plans.len();
        Ok(Self {
            numerics,
            arcs,
            plans,
            h_in: vec![0.0; n],
            h_out: vec![0.0; n],
            step: 0,
            inflow: 0.0,
            outflow: 0.0,
            congested: vec![false; n_junctions],
        })
    }

    pub fn numerics(&self) -> Numerics {
        self.numerics
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.numerics.dt
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn grids(&self) -> Vec<ArcGrid> {
        self.arcs.iter().map(|a| a.grid.clone()).collect()
    }

    pub fn mass(&self) -> f64 {
        self.arcs.iter().map(ArcCells::mass).sum()
    }

    /// Congestion flag of each junction (in network order) from the last step.
    pub fn congested(&self) -> &[bool] {
        &self.congested
    }

    pub fn state(&self) -> NetworkState {
        NetworkState {
            step: self.step,
            time: self.time(),
            fields: self
                .arcs
                .iter()
                .map(|a| (a.grid.arc_id.clone(), a.rho.clone()))
                .collect(),
            inflow: self.inflow,
            outflow: self.outflow,
        }
    }

    fn boundary_fluxes(&mut self) {
        let t = self.time();
        let arcs = &self.arcs;
        for (k, plan) in self.plans.iter().enumerate() {
            match plan {
                Plan::Source { out, inflow } => {
                    self.h_in[*out] =
                        coupling::source_flux(inflow.rate(t), arcs[*out].first(), &arcs[*out].flux);
                }
                Plan::Sink { inc } => {
                    self.h_out[*inc] = coupling::sink_flux(arcs[*inc].last(), &arcs[*inc].flux);
                }
                Plan::OneToOne { inc, out } => {
                    let j = junction_fluxes_one_to_one(
                        arcs[*inc].last(),
                        arcs[*out].first(),
                        &arcs[*inc].flux,
                        &arcs[*out].flux,
                    );
                    self.h_out[*inc] = j.h_out[0];
                    self.h_in[*out] = j.h_in[0];
                    self.congested[k] = j.congested;
                }
                Plan::Diverge {
                    inc,
                    out,
                    mu,
                    active,
                } => {
                    let j = junction_fluxes_diverge(
                        arcs[*inc].last(),
                        [arcs[out[0]].first(), arcs[out[1]].first()],
                        [&arcs[*inc].flux, &arcs[out[0]].flux, &arcs[out[1]].flux],
                        *mu,
                        *active,
                    );
                    self.h_out[*inc] = j.h_out[0];
                    self.h_in[out[0]] = j.h_in[0];
                    self.h_in[out[1]] = j.h_in[1];
                    self.congested[k] = j.congested;
                }
                Plan::Merge { inc, out, q } => {
                    let j = junction_fluxes_merge(
                        [arcs[inc[0]].last(), arcs[inc[1]].last()],
                        arcs[*out].first(),
                        [&arcs[inc[0]].flux, &arcs[inc[1]].flux, &arcs[*out].flux],
                        *q,
                    );
                    self.h_out[inc[0]] = j.h_out[0];
                    self.h_out[inc[1]] = j.h_out[1];
                    self.h_in[*out] = j.h_in[0];
                    self.congested[k] = j.congested;
                }
            }
        }
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<(), SolverError> {
        self.boundary_fluxes();
        let dt = self.numerics.dt;
        let t_next = (self.step + 1) as f64 * dt;
        for plan in &self.plans {
            match plan {
                Plan::Source { out, .. } => self.inflow += self.h_in[*out] * dt,
                Plan::Sink { inc } => self.outflow += self.h_out[*inc] * dt,
                _ => {}
            }
        }
        for (k, arc) in self.arcs.iter_mut().enumerate() {
            let lambda = dt / arc.grid.dx;
            let upper = arc.flux.upper_density() + BOUND_SLACK;
            let n = arc.rho.len();
            let mut left = self.h_in[k];
            for j in 0..n {
                let right = if j + 1 < n {
                    arc.flux.godunov(arc.rho[j], arc.rho[j + 1])
                } else {
                    self.h_out[k]
                };
                let value = arc.rho[j] - lambda * (right - left);
                if !(value >= -BOUND_SLACK && value <= upper) {
                    return Err(SolverError::NumericFault {
                        arc: arc.grid.arc_id.clone(),
                        cell: j,
                        t: t_next,
                        value,
                    });
                }
                arc.rho[j] = value;
                left = right;
            }
        }
        self.step += 1;
        Ok(())
    }

    /// Steps until `step == target` (no-op if already there or past it).
    pub fn advance_to_step(&mut self, target: u64) -> Result<(), SolverError> {
        while self.step < target {
            self.step()?;
        }
        Ok(())
    }

    /// Iterator over the states at the given step indices (sorted ascending).
    pub fn frames(self, steps: Vec<u64>) -> Frames {
        Frames {
            sim: self,
            steps: steps.into_iter(),
            failed: false,
        }
    }
}

/// Lazily stepped sequence of states; stops after the first error.
#[derive(Debug)]
pub struct Frames {
    sim: Simulator,
    steps: std::vec::IntoIter<u64>,
    failed: bool,
}

impl Frames {
    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }
}

impl Iterator for Frames {
    type Item = Result<NetworkState, SolverError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let target = self.steps.next()?;
        match self.sim.advance_to_step(target) {
            Ok(()) => Some(Ok(self.sim.state())),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Step indices for `times`, rounded to the nearest step, with `0` always
/// included; sorted and deduplicated.
pub fn output_steps(times: &[f64], dt: f64) -> Vec<u64> {
    let mut steps: Vec<u64> = std::iter::once(0)
        .chain(times.iter().map(|&t| (t / dt).round().max(0.0) as u64))
        .collect();
    steps.sort_unstable();
    steps.dedup();
    steps
}

/// Runs a scenario and returns the states at `t = 0` and at its output times.
pub fn run_simulation(scenario: &Scenario) -> Result<Trajectory, SolverError> {
    let sim = Simulator::new(&scenario.network, &scenario.profiles, scenario.numerics)?;
    let grids = sim.grids();
    let steps = output_steps(&scenario.output_times, scenario.numerics.dt);
    let states = sim.frames(steps).collect::<Result<Vec<_>, _>>()?;
    Ok(Trajectory { grids, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{BeltArc, Interval, JunctionSpec};

    fn single(inflow: f64) -> Network {
        Network::new(
            [BeltArc::new("a", Interval::new(0.0, 1.0), 1.0, 1.0)],
            vec![
                JunctionSpec::source_with_inflow("s", "a", Inflow::Constant { value: inflow }),
                JunctionSpec::sink("t", "a"),
            ],
        )
    }

    fn numerics() -> Numerics {
        Numerics {
            dx: 0.01,
            dt: 2.5e-5,
            delta: 0.01,
        }
    }

    #[test]
    fn constant_state_is_steady() {
        let profiles =
            BTreeMap::from([(ArcId::from("a"), InitialProfile::Constant { value: 0.4 })]);
        let mut sim = Simulator::new(&single(0.4), &profiles, numerics()).unwrap();
        sim.advance_to_step(1000).unwrap();
        assert!(sim.state().fields[&ArcId::from("a")]
            .iter()
            .all(|&r| (r - 0.4).abs() < 1e-14));
    }

    #[test]
    fn vacuum_is_preserved() {
        let profiles = BTreeMap::from([(ArcId::from("a"), InitialProfile::Zero)]);
        let mut sim = Simulator::new(&single(0.0), &profiles, numerics()).unwrap();
        sim.advance_to_step(100).unwrap();
        assert!(sim.state().fields[&ArcId::from("a")]
            .iter()
            .all(|&r| r == 0.0));
    }

    #[test]
    fn cfl_violation_is_refused() {
        let profiles = BTreeMap::from([(ArcId::from("a"), InitialProfile::Zero)]);
        let err = Simulator::new(
            &single(0.0),
            &profiles,
            Numerics {
                dx: 5e-3,
                dt: 1e-3,
                delta: 1e-2,
            },
        )
        .unwrap_err();
        assert_eq!(
            err,
            SolverError::Cfl {
                dt: 1e-3,
                max: 2.5e-5
            }
        );
    }

    #[test]
    fn initial_bounds_checked() {
        let profiles =
            BTreeMap::from([(ArcId::from("a"), InitialProfile::Constant { value: 1.2 })]);
        assert!(matches!(
            Simulator::new(&single(0.0), &profiles, numerics()),
            Err(SolverError::InitialBounds { .. })
        ));
    }

    #[test]
    fn output_steps_round_and_dedup() {
        assert_eq!(
            output_steps(&[0.0, 1e-5 * 2.4, 1e-5 * 2.6, 3e-5], 1e-5),
            vec![0, 2, 3]
        );
    }
}
