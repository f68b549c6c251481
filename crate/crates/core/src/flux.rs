//! Discontinuous belt flux, its mollified regularization, the Godunov
//! two-point flux and the explicit-scheme time step bound.
//!
//! The exact flux is `a·ρ` below capacity and drops to zero at `ρmax`. The
//! regularized flux multiplies `a·ρ` by one minus the cumulative mass of a
//! triangular mollifier of width `δ` placed on `[ρmax, ρmax + δ]`, which gives
//! a C¹ curve that is linear on `[0, ρmax]` and vanishes from `ρmax + δ` on.
//! It rises slightly past `ρmax` to a single maximum at `ρ*` and then decays,
//! so interval extrema reduce to endpoint/critical-point comparisons.

use thiserror::Error;

use crate::network::Network;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluxError {
    #[error(
        "flux parameters must be positive (a={velocity}, rho_max={capacity}, delta={smoothing})"
    )]
    InvalidParams {
        velocity: f64,
        capacity: f64,
        smoothing: f64,
    },
    #[error("density {value} outside [0, {upper}]")]
    Domain { value: f64, upper: f64 },
}

/// Parameters of the regularized flux on one arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    velocity: f64,
    capacity: f64,
    smoothing: f64,
    /// Location of the maximum of the regularized flux.
    peak: f64,
    peak_flux: f64,
}

impl FluxParams {
    pub fn new(velocity: f64, capacity: f64, smoothing: f64) -> Result<Self, FluxError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(velocity) && ok(capacity) && ok(smoothing)) {
            return Err(FluxError::InvalidParams {
                velocity,
                capacity,
                smoothing,
            });
        }
        // f' = 0 in the first half of the smoothing band: 6δs² + 4ρmax·s − δ = 0.
        let s = 2.0 * smoothing
            / (4.0 * capacity + (16.0 * capacity * capacity + 24.0 * smoothing * smoothing).sqrt());
        let peak = capacity + s * smoothing;
        let mut p = Self {
            velocity,
            capacity,
            smoothing,
            peak,
            peak_flux: 0.0,
        };
        p.peak_flux = p.regularized(peak);
        Ok(p)
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    /// `ρmax + δ`, the upper end of the admissible density range.
    pub fn upper_density(&self) -> f64 {
        self.capacity + self.smoothing
    }

    /// `a·ρmax`.
    pub fn max_flux(&self) -> f64 {
        self.velocity * self.capacity
    }

    /// Argmax of the regularized flux, slightly above `ρmax`.
    pub fn peak_density(&self) -> f64 {
        self.peak
    }

    /// Maximum of the regularized flux; exceeds `a·ρmax` by `O(δ²)`.
    pub fn peak_flux(&self) -> f64 {
        self.peak_flux
    }

    /// True when the smoothing band is not small against the capacity.
    pub fn smoothing_is_coarse(&self) -> bool {
        self.smoothing > self.capacity / 10.0
    }

    #[inline]
    fn band(&self, rho: f64) -> f64 {
        ((rho - self.capacity) / self.smoothing).clamp(0.0, 1.0)
    }

    #[inline]
    pub(crate) fn regularized(&self, rho: f64) -> f64 {
        if rho <= self.capacity {
            return self.velocity * rho;
        }
        let s = self.band(rho);
        self.velocity * rho * (1.0 - mollifier_cdf(s))
    }

    #[inline]
    pub(crate) fn derivative(&self, rho: f64) -> f64 {
        if rho < self.capacity {
            return self.velocity;
        }
        let s = self.band(rho);
        let density = if s < 0.5 { 4.0 * s } else { 4.0 * (1.0 - s) };
        self.velocity * (1.0 - mollifier_cdf(s)) - self.velocity * rho * density / self.smoothing
    }

    /// Exact supremum of `|f'_δ|` on `[0, ρmax + δ]`, attained at the band
    /// midpoint: `2aρmax/δ + a/2`.
    pub fn derivative_sup(&self) -> f64 {
        (2.0 * self.velocity * self.capacity / self.smoothing + 0.5 * self.velocity)
            .max(self.velocity)
    }

    /// Largest flux the arc can emit from a cell at density `rho`.
    #[inline]
    pub fn demand(&self, rho: f64) -> f64 {
        if rho <= self.peak {
            self.regularized(rho)
        } else {
            self.peak_flux
        }
    }

    /// Largest flux the arc can accept into a cell at density `rho`.
    #[inline]
    pub fn supply(&self, rho: f64) -> f64 {
        if rho >= self.peak {
            self.regularized(rho)
        } else {
            self.peak_flux
        }
    }

    /// Godunov flux without the domain check.
    #[inline]
    pub(crate) fn godunov(&self, left: f64, right: f64) -> f64 {
        self.demand(left).min(self.supply(right))
    }
}

/// Cumulative mass of the unit triangular density on `[0, 1]` peaked at 1/2.
#[inline]
fn mollifier_cdf(s: f64) -> f64 {
    if s <= 0.5 {
        2.0 * s * s
    } else {
        let r = 1.0 - s;
        1.0 - 2.0 * r * r
    }
}

/// Heaviside convention `H(0) = 0`: the flux is zero at capacity.
pub fn exact_flux(velocity: f64, capacity: f64, rho: f64) -> f64 {
    if rho < capacity {
        velocity * rho
    } else {
        0.0
    }
}

/// Scaled triangular mollifier `(2/δ)·max(0, 1 − |2y/δ|)`.
pub fn mollifier(delta: f64, y: f64) -> f64 {
    2.0 / delta * (1.0 - (2.0 * y / delta).abs()).max(0.0)
}

pub fn regularized_flux(p: &FluxParams, rho: f64) -> f64 {
    p.regularized(rho)
}

pub fn regularized_flux_derivative(p: &FluxParams, rho: f64) -> f64 {
    p.derivative(rho)
}

/// Godunov flux: the minimum of `f_δ` over `[ρl, ρr]` when `ρl ≤ ρr`,
/// otherwise the maximum over `[ρr, ρl]`.
pub fn godunov_flux(p: &FluxParams, left: f64, right: f64) -> Result<f64, FluxError> {
    let upper = p.upper_density();
    for value in [left, right] {
        if !(0.0..=upper).contains(&value) {
            return Err(FluxError::Domain { value, upper });
        }
    }
    Ok(p.godunov(left, right))
}

/// Nominal derivative bound `2/δ` used in the time-step restriction.
pub fn nominal_derivative_bound(delta: f64) -> f64 {
    2.0 / delta
}

/// Largest stable time step `Δx / (max_v |δ_v^-| · 2/δ)`.
///
/// Uses the nominal derivative bound; with at most two incoming arcs per
/// junction this is `Δx·δ/4`.
pub fn cfl_max_timestep(network: &Network, delta: f64, dx: f64) -> f64 {
    let in_degree = network.max_in_degree().max(1) as f64;
    dx / (in_degree * nominal_derivative_bound(delta))
}

/// Time step bound using the exact `‖f'_δ‖∞` of the fastest arc instead of
/// the nominal `2/δ`. Guarantees monotonicity of the scheme for any arc
/// velocity and capacity.
pub fn strict_cfl_max_timestep(network: &Network, delta: f64, dx: f64) -> f64 {
    let in_degree = network.max_in_degree().max(1) as f64;
    let sup = network
        .arcs
        .values()
        .filter_map(|a| FluxParams::new(a.velocity, a.capacity, delta).ok())
        .map(|p| p.derivative_sup())
        .fold(0.0_f64, f64::max);
    if sup == 0.0 {
        return f64::INFINITY;
    }
    dx / (in_degree * sup)
}
