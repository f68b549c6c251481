//! Riemann problem at a one-to-one junction with constant states on each side.

use crate::analytic::AnalyticError;
use crate::network::BeltArc;

/// Discontinuity travelling with `speed` from state `left` to state `right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub speed: f64,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiemannCase {
    /// Everything arriving passes: `a1ρl ≤ a2ρmax2`.
    FreeFlow,
    /// The outgoing arc cannot absorb the arriving flux; a queue at
    /// capacity grows backwards on the incoming arc.
    Congested,
}

/// Self-similar solution in `ξ = (x − x_J)/t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannSolution {
    pub case: RiemannCase,
    /// Ordered by speed.
    pub waves: Vec<Wave>,
    pub left: f64,
    pub right: f64,
}

impl RiemannSolution {
    /// Density at offset `xi` from the junction at time `t > 0`, taking the
    /// left limit at each wave.
    pub fn sample(&self, xi: f64, t: f64) -> f64 {
        let mut state = self.left;
        for w in &self.waves {
            // stationary waves sit at the junction; everything left of 0 is upstream
            let past = if w.speed == 0.0 {
                xi > 0.0
            } else {
                xi > w.speed * t
            };
            if past {
                state = w.right;
            } else {
                break;
            }
        }
        state
    }
}

/// Solves the Riemann problem with `ρl` on the incoming arc and `ρr` on the
/// outgoing one.
pub fn riemann_one_to_one(
    rho_l: f64,
    rho_r: f64,
    incoming: &BeltArc,
    outgoing: &BeltArc,
) -> Result<RiemannSolution, AnalyticError> {
    for (value, arc) in [(rho_l, incoming), (rho_r, outgoing)] {
        if !(0.0..=arc.capacity).contains(&value) {
            return Err(AnalyticError::Domain {
                arc: arc.id.clone(),
                value,
                upper: arc.capacity,
            });
        }
    }
    let (a1, m1) = (incoming.velocity, incoming.capacity);
    let (a2, m2) = (outgoing.velocity, outgoing.capacity);
    let arriving = a1 * rho_l;
    let exit = a2 * m2;
    let (case, waves) = if arriving <= exit {
        let middle = arriving / a2;
        (
            RiemannCase::FreeFlow,
            vec![
                Wave {
                    speed: 0.0,
                    left: rho_l,
                    right: middle,
                },
                Wave {
                    speed: a2,
                    left: middle,
                    right: rho_r,
                },
            ],
        )
    } else {
        // A full incoming arc passes nothing through its own front.
        let back = if rho_l >= m1 {
            f64::NEG_INFINITY
        } else {
            (exit - arriving) / (m1 - rho_l)
        };
        (
            RiemannCase::Congested,
            vec![
                Wave {
                    speed: back,
                    left: rho_l,
                    right: m1,
                },
                Wave {
                    speed: 0.0,
                    left: m1,
                    right: m2,
                },
                Wave {
                    speed: a2,
                    left: m2,
                    right: rho_r,
                },
            ],
        )
    };
    Ok(RiemannSolution {
        case,
        waves,
        left: rho_l,
        right: rho_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Interval;

    fn arcs(a1: f64, a2: f64) -> (BeltArc, BeltArc) {
        (
            BeltArc::new("1", Interval::new(-1.0, 0.0), a1, 1.0),
            BeltArc::new("2", Interval::new(0.0, 1.0), a2, 1.0),
        )
    }

    #[test]
    fn free_flow_contact() {
        let (i, o) = arcs(1.0, 2.0);
        let s = riemann_one_to_one(0.6, 0.1, &i, &o).unwrap();
        assert_eq!(s.case, RiemannCase::FreeFlow);
        assert_eq!(s.sample(-0.5, 1.0), 0.6);
        assert_eq!(s.sample(0.5, 1.0), 0.3);
        assert_eq!(s.sample(2.5, 1.0), 0.1);
        // left limit at the leading wave
        assert_eq!(s.sample(2.0, 1.0), 0.3);
    }

    #[test]
    fn congested_backward_shock() {
        let (i, o) = arcs(2.0, 1.0);
        let s = riemann_one_to_one(0.8, 0.0, &i, &o).unwrap();
        assert_eq!(s.case, RiemannCase::Congested);
        let back = s.waves[0].speed;
        assert!((back - (1.0 - 1.6) / 0.2).abs() < 1e-14);
        // Rankine-Hugoniot on the incoming arc
        assert!((back * (1.0 - 0.8) - (1.0 - 1.6)).abs() < 1e-14);
        assert_eq!(s.sample(-4.0, 1.0), 0.8);
        assert_eq!(s.sample(-2.0, 1.0), 1.0);
        assert_eq!(s.sample(0.5, 1.0), 1.0);
        assert_eq!(s.sample(1.5, 1.0), 0.0);
    }

    #[test]
    fn full_incoming_arc_and_equal_capacities() {
        let (i, o) = arcs(2.0, 1.0);
        let s = riemann_one_to_one(1.0, 0.0, &i, &o).unwrap();
        assert_eq!(s.waves[0].speed, f64::NEG_INFINITY);
        assert_eq!(s.waves[1].left, s.waves[1].right);
        assert!(riemann_one_to_one(1.2, 0.0, &i, &o).is_err());
    }
}
