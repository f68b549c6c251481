//! Shared generators and checks for the property and acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use beltflow::analytic::{riemann_one_to_one, InitialProfile};
use beltflow::experiments::{uniform_times, Scenario};
use beltflow::flux::{cfl_max_timestep, godunov_flux, strict_cfl_max_timestep, FluxParams};
use beltflow::network::{ArcId, BeltArc, Inflow, Interval, JunctionSpec, Network};
use beltflow::solver::{
    junction_fluxes_diverge, junction_fluxes_merge, junction_fluxes_one_to_one, Numerics,
    Simulator, SolverError,
};
use proptest::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Single,
    OneToOne,
    DivergePassive,
    DivergeActive,
    Merge,
    /// One-to-one feeding a diverge.
    Chain,
}

/// A randomized network run: layout, arc parameters, piecewise-linear
/// initial data and constant source inflows.
#[derive(Debug, Clone)]
pub struct RandomRun {
    pub layout: Layout,
    pub velocities: Vec<f64>,
    pub capacities: Vec<f64>,
    pub profiles: Vec<Vec<f64>>,
    pub inflows: Vec<f64>,
    pub param: f64,
    pub delta: f64,
    pub steps: u64,
}

fn arc_count(layout: Layout) -> usize {
    match layout {
        Layout::Single => 1,
        Layout::OneToOne => 2,
        Layout::Chain => 4,
        _ => 3,
    }
}

fn source_count(layout: Layout) -> usize {
    if layout == Layout::Merge {
        2
    } else {
        1
    }
}

pub fn random_run() -> impl Strategy<Value = RandomRun> {
    let layout = prop_oneof![
        Just(Layout::Single),
        Just(Layout::OneToOne),
        Just(Layout::DivergePassive),
        Just(Layout::DivergeActive),
        Just(Layout::Merge),
        Just(Layout::Chain),
    ];
    layout.prop_flat_map(|layout| {
        let n = arc_count(layout);
        (
            Just(layout),
            prop::collection::vec(0.5..4.0f64, n),
            prop::collection::vec(0.5..2.0f64, n),
            prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 6), n),
            prop::collection::vec(0.0..=1.0f64, source_count(layout)),
            0.0..=1.0f64,
            prop_oneof![Just(0.01), Just(0.05), Just(0.1)],
            50u64..300,
        )
            .prop_map(
                |(
                    layout,
                    velocities,
                    capacities,
                    shapes,
                    inflow_fractions,
                    param,
                    delta,
                    steps,
                )| {
                    // Scale the samples into [0, ρmax] and the inflow into [0, a·ρmax].
                    let profiles = shapes
                        .iter()
                        .zip(&capacities)
                        .map(|(s, &c)| s.iter().map(|v| v * c).collect())
                        .collect();
                    let inflows = inflow_fractions
                        .iter()
                        .enumerate()
                        .map(|(i, f)| f * velocities[i] * capacities[i])
                        .collect();
                    RandomRun {
                        layout,
                        velocities,
                        capacities,
                        profiles,
                        inflows,
                        param,
                        delta,
                        steps,
                    }
                },
            )
    })
}

impl RandomRun {
    pub fn network(&self) -> Network {
        let id = |i: usize| ArcId(format!("a{i}"));
        let domain = |i: usize| match (self.layout, i) {
            (Layout::Single, _) => Interval::new(0.0, 1.0),
            (Layout::Merge, 0 | 1) => Interval::new(-1.0, 0.0),
            (Layout::Chain, 0) => Interval::new(-2.0, -1.0),
            (Layout::Chain, 1) => Interval::new(-1.0, 0.0),
            (_, 0) => Interval::new(-1.0, 0.0),
            _ => Interval::new(0.0, 1.0),
        };
        let arcs: Vec<BeltArc> = (0..arc_count(self.layout))
            .map(|i| BeltArc::new(id(i), domain(i), self.velocities[i], self.capacities[i]))
            .collect();
        let src = |i: usize| {
            JunctionSpec::source_with_inflow(
                format!("s{i}"),
                id(i),
                Inflow::Constant {
                    value: self.inflows[i],
                },
            )
        };
        let sink = |i: usize| JunctionSpec::sink(format!("t{i}"), id(i));
        let junctions = match self.layout {
            Layout::Single => vec![src(0), sink(0)],
            Layout::OneToOne => vec![src(0), JunctionSpec::one_to_one("j", id(0), id(1)), sink(1)],
            Layout::DivergePassive | Layout::DivergeActive => vec![
                src(0),
                JunctionSpec::diverge(
                    "j",
                    self.layout == Layout::DivergeActive,
                    id(0),
                    [id(1), id(2)],
                    self.param,
                ),
                sink(1),
                sink(2),
            ],
            Layout::Merge => vec![
                src(0),
                src(1),
                JunctionSpec::merge("j", [id(0), id(1)], id(2), self.param),
                sink(2),
            ],
            Layout::Chain => vec![
                src(0),
                JunctionSpec::one_to_one("j0", id(0), id(1)),
                JunctionSpec::diverge("j1", true, id(1), [id(2), id(3)], self.param),
                sink(2),
                sink(3),
            ],
        };
        Network::new(arcs, junctions)
    }

    pub fn profiles(&self, network: &Network) -> BTreeMap<ArcId, InitialProfile> {
        network
            .arcs
            .values()
            .map(|arc| {
                let i: usize = arc.id.as_str()[1..].parse().unwrap();
                let samples = &self.profiles[i];
                let n = samples.len() - 1;
                let points = samples
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| (arc.domain.lo + arc.domain.length() * j as f64 / n as f64, v))
                    .collect();
                (arc.id.clone(), InitialProfile::Table { points })
            })
            .collect()
    }

    /// Runs at the smaller of both time step bounds on a coarse grid and checks
    /// mass conservation and the density bounds after every step.
    /// Returns the largest relative mass defect.
    pub fn check(&self) -> Result<f64, String> {
        let network = self.network();
        let report = network.validate();
        if !report.is_empty() {
            return Err(format!("generated invalid network: {report}"));
        }
        let dx = 0.05;
        // the solver enforces the nominal bound; slow arcs need it
        let dt = strict_cfl_max_timestep(&network, self.delta, dx)
            .min(cfl_max_timestep(&network, self.delta, dx));
        let numerics = Numerics {
            dx,
            dt,
            delta: self.delta,
        };
        let mut sim = Simulator::new(&network, &self.profiles(&network), numerics)
            .map_err(|e| e.to_string())?;
        let m0 = sim.mass();
        let mut worst = 0.0f64;
        for _ in 0..self.steps {
            sim.step().map_err(|e| e.to_string())?;
            let s = sim.state();
            let scale = (m0 + s.inflow).max(1e-300);
            let defect = (sim.mass() + s.outflow - m0 - s.inflow).abs() / scale;
            worst = worst.max(defect);
            for arc in network.arcs.values() {
                let upper = arc.capacity + self.delta;
                if let Some(v) = s.fields[&arc.id]
                    .iter()
                    .find(|&&v| !(0.0..=upper).contains(&v))
                {
                    return Err(format!(
                        "density {v} outside [0, {upper}] on arc {}",
                        arc.id
                    ));
                }
            }
        }
        Ok(worst)
    }
}

/// Godunov flux monotonicity on an `n × n` state grid by forward
/// differences: nondecreasing in the left state, nonincreasing in the right.
pub fn godunov_monotone(p: &FluxParams, n: usize) -> Result<(), String> {
    let upper = p.upper_density();
    let h = upper / n as f64;
    let eps = h * 1e-3;
    let tol = 1e-12 * p.peak_flux();
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (i as f64 * h, j as f64 * h);
            let base = godunov_flux(p, u, v).unwrap();
            let du = godunov_flux(p, (u + eps).min(upper), v).unwrap() - base;
            let dv = godunov_flux(p, u, (v + eps).min(upper)).unwrap() - base;
            if du < -tol || dv > tol {
                return Err(format!("not monotone at ({u}, {v}): du={du}, dv={dv}"));
            }
        }
    }
    Ok(())
}

/// Bit-exact flux balance of all junction rules for the given traces.
pub fn junction_balance(
    params: [&FluxParams; 3],
    rho: [f64; 3],
    shares: f64,
) -> Result<(), String> {
    let one = junction_fluxes_one_to_one(rho[0], rho[1], params[0], params[1]);
    if one.h_out[0] != one.h_in[0] {
        return Err(format!("one-to-one {one:?}"));
    }
    for active in [false, true] {
        let d = junction_fluxes_diverge(rho[0], [rho[1], rho[2]], params, shares, active);
        if d.h_out[0] != d.h_in[0] + d.h_in[1] || d.h_in.iter().any(|&h| h < 0.0) {
            return Err(format!("diverge {d:?}"));
        }
    }
    let m = junction_fluxes_merge([rho[0], rho[1]], rho[2], params, shares);
    if m.h_in[0] != m.h_out[0] + m.h_out[1] || m.h_out.iter().any(|&h| h < 0.0) {
        return Err(format!("merge {m:?}"));
    }
    Ok(())
}

/// Two-state problem at a one-to-one junction in the congested regime,
/// arcs `(-1, 0)` and `(0, 1)` with speeds 2 and 1.
pub struct RiemannSetup {
    pub rho_l: f64,
    pub rho_r: f64,
    pub horizon: f64,
}

impl RiemannSetup {
    pub fn arcs(&self) -> (BeltArc, BeltArc) {
        (
            BeltArc::new("l", Interval::new(-1.0, 0.0), 2.0, 1.0),
            BeltArc::new("r", Interval::new(0.0, 1.0), 1.0, 1.0),
        )
    }

    pub fn scenario(&self, dx: f64, delta: f64) -> Scenario {
        let (l, r) = self.arcs();
        let inflow = l.velocity * self.rho_l;
        let network = Network::new(
            [l.clone(), r.clone()],
            vec![
                JunctionSpec::source_with_inflow("s", "l", Inflow::Constant { value: inflow }),
                JunctionSpec::one_to_one("j", "l", "r"),
                JunctionSpec::sink("t", "r"),
            ],
        );
        let profiles = BTreeMap::from([
            (l.id.clone(), InitialProfile::Constant { value: self.rho_l }),
            (r.id.clone(), InitialProfile::Constant { value: self.rho_r }),
        ]);
        let dt = cfl_max_timestep(&network, delta, dx);
        // land exactly on the horizon
        let steps = (self.horizon / dt).ceil();
        Scenario {
            name: "riemann".into(),
            network,
            profiles,
            horizon: self.horizon,
            numerics: Numerics {
                dx,
                dt: self.horizon / steps,
                delta,
            },
            output_times: uniform_times(self.horizon, 2),
        }
    }

    /// L1 distance at the horizon between the finite-volume solution and
    /// the exact wave structure.
    pub fn l1_error(&self, dx: f64, delta: f64) -> Result<f64, SolverError> {
        let (l, r) = self.arcs();
        let exact = riemann_one_to_one(self.rho_l, self.rho_r, &l, &r).unwrap();
        let traj = self.scenario(dx, delta).simulate()?;
        let state = traj.last();
        Ok(traj
            .grids
            .iter()
            .map(|g| {
                state.fields[&g.arc_id]
                    .iter()
                    .enumerate()
                    .map(|(j, &rho)| (rho - exact.sample(g.center(j), state.time)).abs() * g.dx)
                    .sum::<f64>()
            })
            .sum())
    }
}

/// Observed L1 orders of the Riemann problem over three refinements with
/// the smoothing width refined along with the grid.
pub fn riemann_orders() -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let setup = RiemannSetup {
        rho_l: 0.8,
        rho_r: 1.0,
        horizon: 0.2,
    };
    let dxs = [0.02, 0.01, 0.005, 0.0025];
    let errors = dxs
        .iter()
        .map(|&dx| setup.l1_error(dx, dx))
        .collect::<Result<Vec<_>, _>>()?;
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((errors, orders))
}
