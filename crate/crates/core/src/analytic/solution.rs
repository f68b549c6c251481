//! Closed-form and semi-analytic solutions of single-junction networks with
//! the discontinuous flux.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::analytic::congestion::{
    merge_interfaces, single_feed_interfaces, CongestionWindow, InterfaceG, QueueSeries,
};
use crate::analytic::junction::{beta_active, FeedArc, JunctionSetup};
use crate::analytic::profile::{ExtendedProfile, InitialProfile};
use crate::analytic::AnalyticError;
use crate::network::{ArcId, BeltArc, JunctionKind, Network};

#[derive(Debug, Clone)]
enum Layout {
    SingleArc {
        arc: BeltArc,
        profile: ExtendedProfile,
    },
    Junction {
        setup: JunctionSetup,
        outgoing_profiles: Vec<InitialProfile>,
        interfaces: Vec<InterfaceG>,
        series: Option<Arc<QueueSeries>>,
    },
}

/// Reference solution on a network with at most one interior junction,
/// valid on `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct AnalyticSolution {
    horizon: f64,
    layout: Layout,
}

fn profile_for(
    profiles: &BTreeMap<ArcId, InitialProfile>,
    id: &ArcId,
) -> Result<InitialProfile, AnalyticError> {
    profiles
        .get(id)
        .cloned()
        .ok_or_else(|| AnalyticError::MissingProfile(id.clone()))
}

fn extended(
    network: &Network,
    arc: &BeltArc,
    profiles: &BTreeMap<ArcId, InitialProfile>,
) -> Result<ExtendedProfile, AnalyticError> {
    let inflow = network
        .upstream_junction(&arc.id)
        .and_then(|j| j.inflow.clone());
    Ok(ExtendedProfile::new(
        arc.domain,
        arc.velocity,
        profile_for(profiles, &arc.id)?,
        inflow,
    ))
}

impl AnalyticSolution {
    /// Builds the solution for `network` with initial data `profiles`.
    pub fn build(
        network: &Network,
        profiles: &BTreeMap<ArcId, InitialProfile>,
        horizon: f64,
    ) -> Result<Self, AnalyticError> {
        let report = network.validate();
        if !report.is_empty() {
            return Err(AnalyticError::InvalidNetwork(report.to_string()));
        }
        let interior: Vec<_> = network.interior_junctions().collect();
        let layout = match interior.as_slice() {
            [] => {
                let mut arcs = network.arcs.values();
                match (arcs.next(), arcs.next()) {
                    (Some(arc), None) => Layout::SingleArc {
                        arc: arc.clone(),
                        profile: extended(network, arc, profiles)?,
                    },
                    _ => return Err(AnalyticError::NoOracle("disconnected arcs".into())),
                }
            }
            [j] => {
                let arc = |id: &ArcId| network.arc(id).cloned().expect("validated network");
                let incoming = j
                    .in_arcs
                    .iter()
                    .map(|id| {
                        let arc = arc(id);
                        Ok(FeedArc {
                            profile: extended(network, &arc, profiles)?,
                            arc,
                        })
                    })
                    .collect::<Result<Vec<_>, AnalyticError>>()?;
                let outgoing: Vec<BeltArc> = j.out_arcs.iter().map(arc).collect();
                for o in &outgoing {
                    if network.downstream_junction(&o.id).map(|d| d.kind)
                        != Some(JunctionKind::Sink)
                    {
                        return Err(AnalyticError::NoOracle(format!(
                            "arc {} does not end in a sink",
                            o.id
                        )));
                    }
                }
                let outgoing_profiles = outgoing
                    .iter()
                    .map(|o| profile_for(profiles, &o.id))
                    .collect::<Result<Vec<_>, _>>()?;
                let setup = JunctionSetup {
                    id: j.id.clone(),
                    kind: j.kind,
                    position: incoming[0].arc.domain.hi,
                    incoming,
                    outgoing,
                    mu: j.mu.unwrap_or(1.0),
                    q: j.q.unwrap_or(0.5),
                };
                let (interfaces, series) = if setup.kind == JunctionKind::Merge {
                    let series = Arc::new(QueueSeries::build(&setup, horizon));
                    (merge_interfaces(&setup, &series, horizon)?, Some(series))
                } else {
                    (single_feed_interfaces(&setup, horizon)?, None)
                };
                Layout::Junction {
                    setup,
                    outgoing_profiles,
                    interfaces,
                    series,
                }
            }
            _ => {
                return Err(AnalyticError::NoOracle(format!(
                    "{} interior junctions",
                    interior.len()
                )))
            }
        };
        Ok(Self { horizon, layout })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn setup(&self) -> Option<&JunctionSetup> {
        match &self.layout {
            Layout::Junction { setup, .. } => Some(setup),
            Layout::SingleArc { .. } => None,
        }
    }

    /// Congestion fronts found up to the horizon.
    pub fn interfaces(&self) -> &[InterfaceG] {
        match &self.layout {
            Layout::Junction { interfaces, .. } => interfaces,
            Layout::SingleArc { .. } => &[],
        }
    }

    /// Congestion windows on incoming arc `id`, in time order.
    pub fn windows(&self, id: &ArcId) -> Vec<CongestionWindow> {
        self.interfaces()
            .iter()
            .filter(|g| &g.arc == id)
            .map(|g| g.window)
            .collect()
    }

    /// First time any incoming arc congests.
    pub fn first_congestion(&self) -> Option<f64> {
        self.interfaces()
            .iter()
            .map(|g| g.window.t_start)
            .reduce(f64::min)
    }

    fn congested_at(&self, arc: &ArcId, t: f64) -> bool {
        self.interfaces()
            .iter()
            .any(|g| &g.arc == arc && g.window.contains(t))
    }

    /// Flux leaving incoming arc `i` through the junction at time `t`.
    pub fn junction_outflow(&self, i: usize, t: f64) -> f64 {
        let Layout::Junction { setup, series, .. } = &self.layout else {
            return 0.0;
        };
        if let Some(series) = series {
            return series
                .outflow(i, t)
                .unwrap_or_else(|| setup.arriving_flux(i, t));
        }
        if self.congested_at(&setup.incoming[0].arc.id, t) {
            setup.congested_exit_flux()
        } else {
            setup.arriving_flux(0, t)
        }
    }

    /// Flux entering outgoing arc `k` at the junction at time `t`.
    pub fn junction_inflow(&self, k: usize, t: f64) -> f64 {
        let Layout::Junction { setup, .. } = &self.layout else {
            return 0.0;
        };
        match setup.kind {
            JunctionKind::OneToOne => self.junction_outflow(0, t),
            JunctionKind::DivergePassive => setup.alphas()[k] * self.junction_outflow(0, t),
            JunctionKind::DivergeActive => {
                if self.congested_at(&setup.incoming[0].arc.id, t) {
                    setup.outgoing[k].max_flux()
                } else {
                    let inc = &setup.incoming[0].arc;
                    let beta = beta_active(
                        setup.mu,
                        setup.arriving_density(0, t),
                        inc.velocity,
                        [&setup.outgoing[0], &setup.outgoing[1]],
                    );
                    [beta.0, beta.1][k] * setup.arriving_flux(0, t)
                }
            }
            JunctionKind::Merge => self.junction_outflow(0, t) + self.junction_outflow(1, t),
            JunctionKind::Source | JunctionKind::Sink => 0.0,
        }
    }

    /// Density on arc `id` at position `x` and time `t`, or `None` for an
    /// unknown arc. Discontinuities take their left limit.
    pub fn evaluate(&self, id: &ArcId, x: f64, t: f64) -> Option<f64> {
        match &self.layout {
            Layout::SingleArc { arc, profile } => {
                (&arc.id == id).then(|| profile.value(x - arc.velocity * t))
            }
            Layout::Junction {
                setup,
                outgoing_profiles,
                interfaces,
                ..
            } => {
                if let Some(feed) = setup.incoming.iter().find(|f| &f.arc.id == id) {
                    let congested = interfaces
                        .iter()
                        .any(|g| &g.arc == id && g.is_congested(x, t));
                    return Some(if congested {
                        feed.arc.capacity
                    } else {
                        feed.profile.value(x - feed.arc.velocity * t)
                    });
                }
                let k = setup.outgoing.iter().position(|o| &o.id == id)?;
                let arc = &setup.outgoing[k];
                let xi = x - setup.position;
                Some(if xi > arc.velocity * t {
                    outgoing_profiles[k].value(x - arc.velocity * t)
                } else {
                    self.junction_inflow(k, t - xi / arc.velocity) / arc.velocity
                })
            }
        }
    }

    /// Total mass on arc `id` at time `t` by midpoint quadrature with `n` cells.
    pub fn arc_mass(&self, arc: &BeltArc, t: f64, n: usize) -> f64 {
        let h = arc.domain.length() / n as f64;
        (0..n)
            .map(|j| {
                self.evaluate(&arc.id, arc.domain.lo + (j as f64 + 0.5) * h, t)
                    .unwrap_or(0.0)
            })
            .sum::<f64>()
            * h
    }
}
