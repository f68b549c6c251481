//! Exact and semi-analytic reference solutions with the discontinuous flux.

pub mod congestion;
pub mod junction;
pub mod profile;
pub mod quadrature;
pub mod riemann;
pub mod roots;
pub mod solution;

use thiserror::Error;

use crate::network::ArcId;

pub use congestion::{
    first_congestion_time, solve_interface_g, CongestionWindow, InterfaceG, QueueSeries,
};
pub use junction::{
    beta_active, merge_allocation, passive_throughput, FeedArc, JunctionSetup, MergeAllocation,
};
pub use profile::{ExtendedProfile, InitialProfile};
pub use riemann::{riemann_one_to_one, RiemannCase, RiemannSolution, Wave};
pub use solution::AnalyticSolution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("no analytic solution for this network: {0}")]
    NoOracle(String),
    #[error("no initial profile for arc {0}")]
    MissingProfile(ArcId),
    #[error("congestion on arc {arc} reaches its upstream end at t={t}")]
    CongestionOverflow { arc: ArcId, t: f64 },
    #[error("density {value} on arc {arc} outside [0, {upper}]")]
    Domain { arc: ArcId, value: f64, upper: f64 },
}
