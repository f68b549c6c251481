//! Conveyor-belt networks modelled by scalar conservation laws whose flux
//! drops to zero at belt capacity.
//!
//! * [`network`]: arcs, junctions and validation.
//! * [`flux`]: exact and regularized flux, Godunov flux, time step bound.
//! * [`solver`]: finite-volume scheme on a network.
//! * [`analytic`]: reference solutions for single-junction networks.
//! * [`experiments`]: error norms and convergence studies.

pub mod analytic;
pub mod experiments;
pub mod flux;
pub mod network;
pub mod solver;
