//! Initial density profiles and their antiderivatives.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::quadrature::adaptive_simpson;
use crate::network::{interpolate, Inflow, Interval};

/// Absolute tolerance of the numeric antiderivative for profiles without a
/// closed form.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Opaque user-supplied profile, integrated numerically.
#[derive(Clone)]
pub struct CustomProfile(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomProfile(..)")
    }
}

impl PartialEq for CustomProfile {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Initial density `ρ0(x)` on one arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialProfile {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude · exp(−steepness·(x − center)²)`.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        center: f64,
        #[serde(default = "three")]
        steepness: f64,
    },
    /// Sampled `(x, ρ)` pairs with linear interpolation, constant beyond the ends.
    Table {
        points: Vec<(f64, f64)>,
    },
    #[serde(skip)]
    Custom(CustomProfile),
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

impl InitialProfile {
    /// The bump used throughout the conveyor experiments:
    /// `exp(−3(x + 3π/5)²)`.
    pub fn reference_gaussian() -> Self {
        InitialProfile::Gaussian {
            amplitude: 1.0,
            center: -0.6 * std::f64::consts::PI,
            steepness: 3.0,
        }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        InitialProfile::Custom(CustomProfile(Arc::new(f)))
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            InitialProfile::Zero => 0.0,
            InitialProfile::Constant { value } => *value,
            InitialProfile::Gaussian {
                amplitude,
                center,
                steepness,
            } => amplitude * (-steepness * (x - center).powi(2)).exp(),
            InitialProfile::Table { points } => interpolate(points, x),
            InitialProfile::Custom(f) => (f.0)(x),
        }
    }

    /// `∫_u^v ρ0(x) dx`.
    pub fn integral(&self, u: f64, v: f64) -> f64 {
        if u == v {
            return 0.0;
        }
        match self {
            InitialProfile::Zero => 0.0,
            InitialProfile::Constant { value } => value * (v - u),
            InitialProfile::Gaussian {
                amplitude,
                center,
                steepness,
            } => {
                let k = steepness.sqrt();
                let scale = amplitude * std::f64::consts::PI.sqrt() / (2.0 * k);
                scale * (libm::erf(k * (v - center)) - libm::erf(k * (u - center)))
            }
            InitialProfile::Table { points } => table_integral(points, u, v),
            InitialProfile::Custom(f) => adaptive_simpson(&*f.0, u, v, QUADRATURE_TOL),
        }
    }

    /// Largest value on `domain` (sampled for custom profiles).
    pub fn max_on(&self, domain: Interval) -> f64 {
        match self {
            InitialProfile::Zero => 0.0,
            InitialProfile::Constant { value } => *value,
            InitialProfile::Gaussian {
                amplitude, center, ..
            } => {
                if *amplitude >= 0.0 {
                    self.value(center.clamp(domain.lo, domain.hi))
                } else {
                    self.value(domain.lo).max(self.value(domain.hi))
                }
            }
            InitialProfile::Table { points } => points
                .iter()
                .map(|&(_, y)| y)
                .chain([self.value(domain.lo), self.value(domain.hi)])
                .fold(f64::NEG_INFINITY, f64::max),
            InitialProfile::Custom(_) => sample_extreme(self, domain, f64::max),
        }
    }

    pub fn min_on(&self, domain: Interval) -> f64 {
        match self {
            InitialProfile::Zero => 0.0,
            InitialProfile::Constant { value } => *value,
            InitialProfile::Gaussian {
                amplitude, center, ..
            } => {
                let ends = self.value(domain.lo).min(self.value(domain.hi));
                if *amplitude >= 0.0 {
                    ends
                } else {
                    self.value(center.clamp(domain.lo, domain.hi))
                }
            }
            InitialProfile::Table { points } => points
                .iter()
                .map(|&(_, y)| y)
                .chain([self.value(domain.lo), self.value(domain.hi)])
                .fold(f64::INFINITY, f64::min),
            InitialProfile::Custom(_) => sample_extreme(self, domain, f64::min),
        }
    }
}

fn sample_extreme(p: &InitialProfile, domain: Interval, pick: fn(f64, f64) -> f64) -> f64 {
    let n = 10_000;
    (0..=n)
        .map(|k| p.value(domain.lo + domain.length() * k as f64 / n as f64))
        .reduce(pick)
        .unwrap_or(0.0)
}

fn table_integral(points: &[(f64, f64)], u: f64, v: f64) -> f64 {
    if v < u {
        return -table_integral(points, v, u);
    }
    // Breakpoints inside (u, v) plus the ends; the integrand is linear between them.
    let mut xs: Vec<f64> = vec![u];
    xs.extend(points.iter().map(|&(x, _)| x).filter(|&x| x > u && x < v));
    xs.push(v);
    xs.windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (interpolate(points, w[0]) + interpolate(points, w[1])))
        .sum()
}

/// Arc profile extended to the whole line in transport coordinates: the
/// initial data on the arc, the source inflow mapped back along the
/// characteristics upstream of it, and zero downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedProfile {
    pub domain: Interval,
    pub velocity: f64,
    pub profile: InitialProfile,
    pub inflow: Inflow,
}

impl ExtendedProfile {
    pub fn new(
        domain: Interval,
        velocity: f64,
        profile: InitialProfile,
        inflow: Option<Inflow>,
    ) -> Self {
        Self {
            domain,
            velocity,
            profile,
            inflow: inflow.unwrap_or_default(),
        }
    }

    /// Density carried by the characteristic through `y` at `t = 0`.
    pub fn value(&self, y: f64) -> f64 {
        if y > self.domain.hi {
            0.0
        } else if y >= self.domain.lo {
            self.profile.value(y)
        } else {
            // Entered through the source at time (lo − y)/a.
            self.inflow.rate((self.domain.lo - y) / self.velocity) / self.velocity
        }
    }

    /// `∫_u^v` of [`ExtendedProfile::value`].
    pub fn integral(&self, u: f64, v: f64) -> f64 {
        if v < u {
            return -self.integral(v, u);
        }
        let Interval { lo, hi } = self.domain;
        let mut total = 0.0;
        let (a, b) = (u.max(lo), v.min(hi));
        if b > a {
            total += self.profile.integral(a, b);
        }
        if u < lo {
            let b = v.min(lo);
            total += self.upstream_integral(u, b);
        }
        total
    }

    fn upstream_integral(&self, u: f64, v: f64) -> f64 {
        let lo = self.domain.lo;
        let a = self.velocity;
        match &self.inflow {
            Inflow::Constant { value } => value / a * (v - u),
            // y ↦ τ = (lo − y)/a maps [u, v] onto [τ(v), τ(u)] with dy = a·dτ.
            Inflow::Table { points } => table_integral(points, (lo - v) / a, (lo - u) / a),
        }
    }
}
