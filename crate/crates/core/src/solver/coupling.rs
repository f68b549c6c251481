//! Boundary fluxes at junctions from the traces of the adjacent cells.
//!
//! Every rule is phrased through the demand of the last cell of an incoming
//! arc and the supply of the first cell of an outgoing arc. Outgoing arcs of
//! diverges and merges never accept more than their capacity flux `a·ρmax`.

use arrayvec::ArrayVec;

use crate::analytic::junction::merge_allocation;
use crate::flux::FluxParams;

/// Fluxes across one junction for one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionFluxes {
    /// Flux leaving each incoming arc.
    pub h_out: ArrayVec<f64, 2>,
    /// Flux entering each outgoing arc.
    pub h_in: ArrayVec<f64, 2>,
    /// The junction could not pass the full demand of its incoming arcs.
    pub congested: bool,
}

impl JunctionFluxes {
    fn new(h_out: &[f64], h_in: &[f64], congested: bool) -> Self {
        Self {
            h_out: h_out.iter().copied().collect(),
            h_in: h_in.iter().copied().collect(),
            congested,
        }
    }
}

fn capped_supply(p: &FluxParams, rho: f64) -> f64 {
    p.supply(rho).min(p.max_flux())
}

/// `min(demand_in(ρ_in), supply_out(ρ_out))`; the Godunov flux when both
/// arcs share their parameters.
pub fn junction_fluxes_one_to_one(
    rho_in: f64,
    rho_out: f64,
    inc: &FluxParams,
    out: &FluxParams,
) -> JunctionFluxes {
    let demand = inc.demand(rho_in);
    let h = demand.min(out.supply(rho_out));
    JunctionFluxes::new(&[h], &[h], h < demand)
}

/// Diverge with shares `(μ, 1 − μ)`. A passive diverge keeps the ratio and
/// throttles the total; an active one abandons it and fills the outgoing
/// arcs in proportion to their supplies.
pub fn junction_fluxes_diverge(
    rho_in: f64,
    rho_out: [f64; 2],
    params: [&FluxParams; 3],
    mu: f64,
    active: bool,
) -> JunctionFluxes {
    let demand = params[0].demand(rho_in);
    let supply = [
        capped_supply(params[1], rho_out[0]),
        capped_supply(params[2], rho_out[1]),
    ];
    let alpha = [mu, 1.0 - mu];
    let fits = (0..2).all(|k| alpha[k] * demand <= supply[k]);
    let h = if fits {
        [alpha[0] * demand, alpha[1] * demand]
    } else if active {
        let room = supply[0] + supply[1];
        let total = demand.min(room);
        [total * supply[0] / room, total * supply[1] / room]
    } else {
        let limit = |k: usize| {
            if alpha[k] > 0.0 {
                supply[k] / alpha[k]
            } else {
                f64::INFINITY
            }
        };
        let total = demand.min(limit(0)).min(limit(1));
        [alpha[0] * total, alpha[1] * total]
    };
    JunctionFluxes::new(&[h[0] + h[1]], &h, !fits)
}

/// Merge of two incoming arcs by priority `q`.
pub fn junction_fluxes_merge(
    rho_in: [f64; 2],
    rho_out: f64,
    params: [&FluxParams; 3],
    q: f64,
) -> JunctionFluxes {
    let demand = [params[0].demand(rho_in[0]), params[1].demand(rho_in[1])];
    let supply = capped_supply(params[2], rho_out);
    let alloc = merge_allocation(demand[0], demand[1], supply, q);
    JunctionFluxes::new(
        &[alloc.f1, alloc.f2],
        &[alloc.f1 + alloc.f2],
        demand[0] + demand[1] > supply,
    )
}

/// Inflow through a source, limited by what the first cell accepts.
pub fn source_flux(inflow: f64, rho_out: f64, out: &FluxParams) -> f64 {
    inflow.min(out.supply(rho_out))
}

/// Outflow through a sink: the demand of the last cell.
pub fn sink_flux(rho_in: f64, inc: &FluxParams) -> f64 {
    inc.demand(rho_in)
}
