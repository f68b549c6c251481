//! Single-junction configurations and the flux-allocation rules shared by
//! the analytic solutions and the finite-volume coupling.

use crate::analytic::profile::ExtendedProfile;
use crate::network::{BeltArc, JunctionKind};

/// An incoming arc together with its extended initial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedArc {
    pub arc: BeltArc,
    pub profile: ExtendedProfile,
}

/// One interior junction with its attached arcs, in arc-local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionSetup {
    pub id: String,
    pub kind: JunctionKind,
    /// Shared endpoint of all attached arcs.
    pub position: f64,
    pub incoming: Vec<FeedArc>,
    pub outgoing: Vec<BeltArc>,
    /// Distribution parameter (diverge kinds).
    pub mu: f64,
    /// Merging parameter.
    pub q: f64,
}

impl JunctionSetup {
    /// Density arriving at the junction on incoming arc `i` at time `t`,
    /// `ρ0_i(x_J − a_i t)`.
    pub fn arriving_density(&self, i: usize, t: f64) -> f64 {
        let feed = &self.incoming[i];
        feed.profile.value(self.position - feed.arc.velocity * t)
    }

    pub fn arriving_flux(&self, i: usize, t: f64) -> f64 {
        self.incoming[i].arc.velocity * self.arriving_density(i, t)
    }

    /// Mass reaching the junction on arc `i` during `[t0, t1]`.
    pub fn arrived_mass(&self, i: usize, t0: f64, t1: f64) -> f64 {
        let feed = &self.incoming[i];
        let a = feed.arc.velocity;
        feed.profile
            .integral(self.position - a * t1, self.position - a * t0)
    }

    /// Distribution shares `(α2, α3) = (μ, 1 − μ)`.
    pub fn alphas(&self) -> [f64; 2] {
        [self.mu, 1.0 - self.mu]
    }

    fn out_capacity_flux(&self, k: usize) -> f64 {
        self.outgoing[k].max_flux()
    }

    /// Arriving flux above which the junction cannot pass everything on.
    /// For merges this applies to the sum of both arriving fluxes.
    pub fn congestion_threshold(&self) -> f64 {
        match self.kind {
            JunctionKind::OneToOne => self.out_capacity_flux(0),
            JunctionKind::DivergePassive => passive_throughput(
                self.mu,
                self.out_capacity_flux(0),
                self.out_capacity_flux(1),
            ),
            JunctionKind::DivergeActive | JunctionKind::Merge => {
                self.outgoing.iter().map(BeltArc::max_flux).sum::<f64>()
            }
            JunctionKind::Source | JunctionKind::Sink => f64::INFINITY,
        }
    }

    /// Flux leaving the single incoming arc while it is congested.
    /// Not meaningful for merges, whose shares vary.
    pub fn congested_exit_flux(&self) -> f64 {
        self.congestion_threshold()
    }

    /// Positive when the arriving flux exceeds what the junction can pass.
    pub fn congestion_excess(&self, t: f64) -> f64 {
        let arriving: f64 = (0..self.incoming.len())
            .map(|i| self.arriving_flux(i, t))
            .sum();
        arriving - self.congestion_threshold()
    }

    /// Plateau densities `(ρ̄2, ρ̄3)` on the outgoing arcs of a congested
    /// passive diverge.
    pub fn passive_plateaus(&self) -> [f64; 2] {
        let exit = self.congested_exit_flux();
        let alphas = self.alphas();
        [0, 1].map(|k| alphas[k] * exit / self.outgoing[k].velocity)
    }

    /// Transport speed `ā` inside the congested region of each incoming arc:
    /// exiting flux over upstream capacity.
    pub fn congested_velocity(&self) -> Vec<f64> {
        match self.kind {
            JunctionKind::Merge => {
                let alloc = merge_allocation(
                    self.incoming[0].arc.max_flux(),
                    self.incoming[1].arc.max_flux(),
                    self.outgoing[0].max_flux(),
                    self.q,
                );
                vec![
                    alloc.f1 / self.incoming[0].arc.capacity,
                    alloc.f2 / self.incoming[1].arc.capacity,
                ]
            }
            _ => vec![self.congested_exit_flux() / self.incoming[0].arc.capacity],
        }
    }

    /// Whether congestion can ever occur for these parameters, i.e. the
    /// threshold lies below what the incoming arcs can deliver.
    pub fn can_congest(&self) -> bool {
        let deliverable: f64 = self.incoming.iter().map(|f| f.arc.max_flux()).sum();
        deliverable > self.congestion_threshold()
    }
}

/// Largest total flux a passive diverge can pass while keeping the ratio
/// `μ : (1 − μ)`: `min{f2max/μ, f3max/(1−μ)}`.
pub fn passive_throughput(mu: f64, cap2: f64, cap3: f64) -> f64 {
    let limit = |share: f64, cap: f64| {
        if share > 0.0 {
            cap / share
        } else {
            f64::INFINITY
        }
    };
    limit(mu, cap2).min(limit(1.0 - mu, cap3))
}

/// Outgoing shares `(β2, β3)` of an active diverge for an arriving
/// density `trace` on the incoming arc of speed `a_in`.
///
/// Free flow keeps `(μ, 1 − μ)`. Once one outgoing arc would exceed its
/// capacity the shares follow `min{max{α_i, (a_i/a1)ρmax_i/trace}, r_i}`
/// with `r_i = a_iρmax_i / (a2ρmax2 + a3ρmax3)`, and at or beyond the
/// combined capacity they equal `r_i`.
pub fn beta_active(mu: f64, trace: f64, a_in: f64, out: [&BeltArc; 2]) -> (f64, f64) {
    let alpha = [mu, 1.0 - mu];
    if trace <= 0.0 {
        return (alpha[0], alpha[1]);
    }
    let arriving = a_in * trace;
    let caps = [out[0].max_flux(), out[1].max_flux()];
    let total_cap = caps[0] + caps[1];
    if alpha[0] * arriving <= caps[0] && alpha[1] * arriving <= caps[1] {
        return (alpha[0], alpha[1]);
    }
    let optimal = [caps[0] / total_cap, caps[1] / total_cap];
    if arriving >= total_cap {
        return (optimal[0], optimal[1]);
    }
    let beta = |k: usize| {
        let avoid = out[k].velocity / a_in * out[k].capacity / trace;
        alpha[k].max(avoid).min(optimal[k])
    };
    (beta(0), beta(1))
}

/// Merge fluxes chosen from the admissible set
/// `Θ = {0 ≤ f1 ≤ f1max, 0 ≤ f2 ≤ f2max, f1 + f2 ≤ f3max}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeAllocation {
    pub f1: f64,
    pub f2: f64,
    /// Merging parameter after projection onto `Θ`.
    pub q_effective: f64,
}

/// Splits the outgoing capacity between the two incoming arcs by priority
/// `q`. The target `P = (q·f3max, (1−q)·f3max)` is kept when admissible and
/// otherwise moved along `f1 + f2 = f3max` to the nearest admissible point.
/// When the incoming arcs cannot fill the outgoing one both pass everything.
pub fn merge_allocation(f1max: f64, f2max: f64, f3max: f64, q: f64) -> MergeAllocation {
    let supply = f1max + f2max;
    if supply <= f3max {
        let q_effective = if supply > 0.0 { f1max / supply } else { q };
        return MergeAllocation {
            f1: f1max,
            f2: f2max,
            q_effective,
        };
    }
    let p1 = q * f3max;
    let p2 = f3max - p1;
    if p1 > f1max {
        MergeAllocation {
            f1: f1max,
            f2: f3max - f1max,
            q_effective: f1max / f3max,
        }
    } else if p2 > f2max {
        let f1 = f3max - f2max;
        MergeAllocation {
            f1,
            f2: f2max,
            q_effective: f1 / f3max,
        }
    } else {
        MergeAllocation {
            f1: p1,
            f2: p2,
            q_effective: q,
        }
    }
}
