//! Congestion windows and the moving congestion front `g(t)` on incoming arcs.

use std::sync::Arc;

use crate::analytic::junction::{merge_allocation, JunctionSetup};
use crate::analytic::profile::ExtendedProfile;
use crate::analytic::roots::{bisect, first_crossing};
use crate::analytic::AnalyticError;
use crate::network::ArcId;

/// Step of the coarse scans that bracket onsets and ends of congestion, and
/// of the queue history at merges.
pub const SCAN_STEP: f64 = 1e-4;
/// Target accuracy of bracketed times and front positions.
pub const ROOT_TOL: f64 = 1e-11;
/// Number of stored `(t, g)` samples per window.
const SAMPLES: usize = 256;

/// Time interval `(t_start, t_end)` during which an incoming arc is congested.
/// `t_end` is infinite when congestion persists past the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongestionWindow {
    pub t_start: f64,
    pub t_end: f64,
}

impl CongestionWindow {
    /// Open-interval membership.
    pub fn contains(&self, t: f64) -> bool {
        t > self.t_start && t < self.t_end
    }
}

/// First time in `[from, horizon)` at which the arriving flux exceeds what
/// the junction passes on.
pub fn first_congestion_time(setup: &JunctionSetup, from: f64, horizon: f64) -> Option<f64> {
    if !setup.can_congest() {
        return None;
    }
    first_crossing(
        |t| setup.congestion_excess(t) > 0.0,
        from,
        horizon,
        SCAN_STEP,
        ROOT_TOL,
    )
    .filter(|&t| t < horizon)
}

/// Queued mass `Q(t)` in front of the junction, which determines `g`.
#[derive(Debug, Clone)]
enum Queue {
    /// Constant exit flux since `t_start`: `Q = arrived − (t − t_s)·exit`.
    ConstantExit { t_start: f64, exit: f64 },
    /// Time-marched queue (merges).
    Series(Arc<QueueSeries>, usize),
}

/// Queue masses of both incoming arcs of a merge on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSeries {
    pub dt: f64,
    /// `queues[i][k]` at `t = k·dt`.
    pub queues: [Vec<f64>; 2],
    /// Mean flux leaving incoming arc `i` over `[k·dt, (k+1)·dt]`.
    pub outflows: [Vec<f64>; 2],
    /// Whether step `k` was uncongested throughout, so that the exact
    /// arriving fluxes pass on unchanged.
    pub free: Vec<bool>,
}

impl QueueSeries {
    /// Marches the merge queues up to `horizon`. While a queue is non-empty
    /// its arc demands its capacity, otherwise it demands the arriving flux;
    /// the outgoing capacity is split with [`merge_allocation`].
    pub fn build(setup: &JunctionSetup, horizon: f64) -> Self {
        let dt = SCAN_STEP;
        let n = (horizon / dt).ceil().max(1.0) as usize;
        let caps = [
            setup.incoming[0].arc.max_flux(),
            setup.incoming[1].arc.max_flux(),
        ];
        let out_cap = setup.outgoing[0].max_flux();
        let mut queues = [vec![0.0; n + 1], vec![0.0; n + 1]];
        let mut outflows = [vec![0.0; n], vec![0.0; n]];
        let mut free = vec![true; n];
        for k in 0..n {
            let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
            let arrived = [setup.arrived_mass(0, t0, t1), setup.arrived_mass(1, t0, t1)];
            let queued = [queues[0][k], queues[1][k]];
            let demand = [0, 1].map(|i| {
                if queued[i] > 0.0 {
                    caps[i]
                } else {
                    arrived[i] / dt
                }
            });
            let alloc = merge_allocation(demand[0], demand[1], out_cap, setup.q);
            let passed = [alloc.f1, alloc.f2];
            // Exact per-step pass-through needs the arriving flux below capacity at both ends.
            let peak: f64 = [t0, t1]
                .iter()
                .map(|&t| setup.arriving_flux(0, t) + setup.arriving_flux(1, t))
                .fold(0.0, f64::max);
            free[k] = queued == [0.0, 0.0] && peak <= out_cap;
            for i in 0..2 {
                let next = if free[k] {
                    0.0
                } else {
                    (queued[i] + arrived[i] - passed[i] * dt).max(0.0)
                };
                queues[i][k + 1] = next;
                outflows[i][k] = (queued[i] + arrived[i] - next) / dt;
            }
        }
        Self {
            dt,
            queues,
            outflows,
            free,
        }
    }

    fn step_index(&self, t: f64) -> usize {
        ((t / self.dt).floor().max(0.0) as usize).min(self.free.len() - 1)
    }

    /// Queue of arc `i` at `t`, linear between grid nodes.
    pub fn queue(&self, i: usize, t: f64) -> f64 {
        let k = self.step_index(t);
        let s = ((t - k as f64 * self.dt) / self.dt).clamp(0.0, 1.0);
        let q = &self.queues[i];
        q[k] + s * (q[k + 1] - q[k])
    }

    /// Flux leaving incoming arc `i` at `t`, or `None` when the step is in
    /// free flow and the exact arriving flux applies.
    pub fn outflow(&self, i: usize, t: f64) -> Option<f64> {
        let k = self.step_index(t);
        (!self.free[k]).then(|| self.outflows[i][k])
    }

    /// Maximal intervals during which the queue of arc `i` is non-empty.
    pub fn windows(&self, i: usize) -> Vec<CongestionWindow> {
        let q = &self.queues[i];
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for (k, &qk) in q.iter().enumerate() {
            match (start, qk > 0.0) {
                (None, true) => start = Some(k.saturating_sub(1)),
                (Some(s), false) => {
                    out.push(CongestionWindow {
                        t_start: s as f64 * self.dt,
                        t_end: k as f64 * self.dt,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push(CongestionWindow {
                t_start: s as f64 * self.dt,
                t_end: f64::INFINITY,
            });
        }
        out
    }
}

/// The congestion front on one incoming arc during one window: the arc is
/// at capacity on `g(t) < x − x_J ≤ 0`.
#[derive(Debug, Clone)]
pub struct InterfaceG {
    pub arc: ArcId,
    pub window: CongestionWindow,
    capacity: f64,
    velocity: f64,
    position: f64,
    length: f64,
    profile: ExtendedProfile,
    queue: Queue,
    /// `(t, g(t))` across the window (up to the horizon).
    pub samples: Vec<(f64, f64)>,
}

impl InterfaceG {
    fn queued_mass(&self, t: f64) -> f64 {
        match &self.queue {
            Queue::ConstantExit { t_start, exit } => {
                let a = self.velocity;
                self.profile
                    .integral(self.position - a * t, self.position - a * t_start)
                    - (t - t_start) * exit
            }
            Queue::Series(series, i) => series.queue(*i, t),
        }
    }

    /// Mass balance in the congested region `(x_J + ξ, x_J)`: capacity
    /// times its length minus the initial mass now packed into it, minus the
    /// queued mass. Decreasing in `ξ`, zero at the front.
    fn residual(&self, xi: f64, t: f64, queued: f64) -> f64 {
        let a = self.velocity;
        let packed = self
            .profile
            .integral(self.position + xi - a * t, self.position - a * t);
        (-xi * self.capacity - packed - queued) / self.capacity
    }

    /// Solves for the front position at `t`, or reports that it left the arc.
    fn solve(&self, t: f64) -> Result<f64, AnalyticError> {
        if !self.window.contains(t) {
            return Ok(0.0);
        }
        let queued = self.queued_mass(t);
        if queued <= 0.0 {
            return Ok(0.0);
        }
        if self.residual(-self.length, t, queued) < 0.0 {
            return Err(AnalyticError::CongestionOverflow {
                arc: self.arc.clone(),
                t,
            });
        }
        Ok(bisect(
            |xi| self.residual(xi, t, queued),
            -self.length,
            0.0,
            ROOT_TOL,
        )
        .unwrap_or(0.0))
    }

    /// Front position `g(t) ≤ 0` relative to the junction; zero outside the window.
    /// Past an overflow the front is pinned to the upstream end.
    pub fn g(&self, t: f64) -> f64 {
        self.solve(t).unwrap_or(-self.length)
    }

    /// Whether `x` (arc coordinate) lies in the congested region at `t`,
    /// using the left limit at the front.
    pub fn is_congested(&self, x: f64, t: f64) -> bool {
        if !self.window.contains(t) {
            return false;
        }
        let xi = x - self.position;
        xi <= 0.0 && xi > self.g(t)
    }

    fn fill_samples(&mut self, horizon: f64) -> Result<(), AnalyticError> {
        let end = self.window.t_end.min(horizon);
        let span = end - self.window.t_start;
        let mut samples = Vec::with_capacity(SAMPLES + 1);
        for k in 0..=SAMPLES {
            let t = self.window.t_start + span * k as f64 / SAMPLES as f64;
            samples.push((t, self.solve(t)?));
        }
        self.samples = samples;
        Ok(())
    }
}

fn feed_interface(
    setup: &JunctionSetup,
    i: usize,
    window: CongestionWindow,
    queue: Queue,
) -> InterfaceG {
    let feed = &setup.incoming[i];
    InterfaceG {
        arc: feed.arc.id.clone(),
        window,
        capacity: feed.arc.capacity,
        velocity: feed.arc.velocity,
        position: setup.position,
        length: feed.arc.domain.length(),
        profile: feed.profile.clone(),
        queue,
        samples: Vec::new(),
    }
}

/// Congestion front starting at `t_start` at a junction with one incoming
/// arc and constant congested exit flux. The window ends once the exit
/// flux has drained everything that arrived since `t_start`.
pub fn solve_interface_g(
    setup: &JunctionSetup,
    t_start: f64,
    horizon: f64,
) -> Result<InterfaceG, AnalyticError> {
    let exit = setup.congested_exit_flux();
    let balance = |t: f64| (t - t_start) * exit - setup.arrived_mass(0, t_start, t);
    let t_end = first_crossing(
        |t| balance(t) >= 0.0,
        t_start + SCAN_STEP,
        horizon,
        SCAN_STEP,
        ROOT_TOL,
    )
    .filter(|&t| t < horizon)
    .unwrap_or(f64::INFINITY);
    let window = CongestionWindow { t_start, t_end };
    let mut interface = feed_interface(setup, 0, window, Queue::ConstantExit { t_start, exit });
    interface.fill_samples(horizon)?;
    Ok(interface)
}

/// All congestion fronts on the single incoming arc up to `horizon`.
pub fn single_feed_interfaces(
    setup: &JunctionSetup,
    horizon: f64,
) -> Result<Vec<InterfaceG>, AnalyticError> {
    let mut out = Vec::new();
    let mut from = 0.0;
    while let Some(t0) = first_congestion_time(setup, from, horizon) {
        let interface = solve_interface_g(setup, t0, horizon)?;
        let t_end = interface.window.t_end;
        out.push(interface);
        if t_end >= horizon {
            break;
        }
        from = t_end;
    }
    Ok(out)
}

/// Congestion fronts on both incoming arcs of a merge.
pub fn merge_interfaces(
    setup: &JunctionSetup,
    series: &Arc<QueueSeries>,
    horizon: f64,
) -> Result<Vec<InterfaceG>, AnalyticError> {
    let mut out = Vec::new();
    for i in 0..2 {
        for window in series.windows(i) {
            let mut interface =
                feed_interface(setup, i, window, Queue::Series(Arc::clone(series), i));
            interface.fill_samples(horizon)?;
            out.push(interface);
        }
    }
    Ok(out)
}
