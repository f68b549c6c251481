use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use beltflow::analytic::{riemann_one_to_one, AnalyticSolution, InitialProfile};
use beltflow::experiments::{builtin_scenario, BUILTIN_NAMES};
use beltflow::network::{ArcId, BeltArc, Inflow, Interval, JunctionSpec, Network};

fn builtin(name: &str) -> AnalyticSolution {
    builtin_scenario(name).unwrap().analytic().unwrap()
}

#[test]
fn interface_endpoints_vanish_and_g_stays_nonpositive() {
    for name in BUILTIN_NAMES {
        let sol = builtin(name);
        for front in sol.interfaces() {
            let w = front.window;
            assert!(w.t_start < w.t_end, "{name}: {w:?}");
            assert_abs_diff_eq!(front.g(w.t_start), 0.0, epsilon = 1e-9);
            if w.t_end.is_finite() {
                assert_abs_diff_eq!(front.g(w.t_end), 0.0, epsilon = 1e-6);
            }
            let end = w.t_end.min(sol.horizon());
            for k in 0..=200 {
                let t = w.t_start + (end - w.t_start) * k as f64 / 200.0;
                assert!(front.g(t) <= 0.0, "{name}: g({t}) = {}", front.g(t));
            }
        }
    }
}

#[test]
fn junction_flux_balances_at_every_sampled_time() {
    for name in BUILTIN_NAMES {
        let sol = builtin(name);
        let setup = sol.setup().unwrap();
        let (n_in, n_out) = (setup.incoming.len(), setup.outgoing.len());
        for k in 0..=400 {
            let t = sol.horizon() * k as f64 / 400.0;
            let inflow: f64 = (0..n_in).map(|i| sol.junction_outflow(i, t)).sum();
            let outflow: f64 = (0..n_out).map(|k| sol.junction_inflow(k, t)).sum();
            assert!(
                (inflow - outflow).abs() <= 1e-9,
                "{name} at t={t}: {inflow} vs {outflow}"
            );
        }
    }
}

#[test]
fn congested_velocity_is_below_incoming_speed() {
    for name in ["test2", "test3_passive", "test4_active", "test5_merge"] {
        let sol = builtin(name);
        let setup = sol.setup().unwrap();
        assert!(!sol.interfaces().is_empty(), "{name} congests");
        for (v, feed) in setup.congested_velocity().iter().zip(&setup.incoming) {
            assert!(
                *v < feed.arc.velocity,
                "{name}: {v} vs {}",
                feed.arc.velocity
            );
        }
    }
    assert!(builtin("test1").interfaces().is_empty());
}

#[test]
fn initial_time_reproduces_profiles() {
    let s = builtin_scenario("test3_passive").unwrap();
    let sol = s.analytic().unwrap();
    for arc in s.network.arcs.values() {
        for k in 1..50 {
            let x = arc.domain.lo + arc.domain.length() * k as f64 / 50.0;
            assert_eq!(
                sol.evaluate(&arc.id, x, 0.0).unwrap(),
                s.profiles[&arc.id].value(x)
            );
        }
    }
}

#[test]
fn single_arc_is_pure_transport() {
    let arc = BeltArc::new("a", Interval::new(0.0, 4.0), 1.5, 1.0);
    let network = Network::new(
        [arc.clone()],
        vec![JunctionSpec::source("s", "a"), JunctionSpec::sink("t", "a")],
    );
    let p = InitialProfile::Gaussian {
        amplitude: 0.8,
        center: 1.0,
        steepness: 5.0,
    };
    let sol = AnalyticSolution::build(
        &network,
        &BTreeMap::from([(arc.id.clone(), p.clone())]),
        2.0,
    )
    .unwrap();
    for &t in &[0.0, 0.3, 1.1, 2.0] {
        for k in 0..=80 {
            let x = 4.0 * k as f64 / 80.0;
            let expected = if x - 1.5 * t >= 0.0 {
                p.value(x - 1.5 * t)
            } else {
                0.0
            };
            assert_eq!(sol.evaluate(&arc.id, x, t).unwrap(), expected);
        }
    }
}

/// Constant states on both sides of a one-to-one junction, fed with the
/// matching constant inflow, must agree with the wave structure away from
/// the waves.
#[test]
fn evaluate_agrees_with_riemann_structure() {
    let cases = [
        (0.9, 1.0, 2.0, 1.0),
        (0.3, 0.15, 1.0, 2.0),
        (0.6, 0.0, 1.0, 1.0),
        (0.7, 0.4, 3.0, 1.0),
    ];
    for (rho_l, rho_r, a1, a2) in cases {
        let l = BeltArc::new("1", Interval::new(-2.0, 0.0), a1, 1.0);
        let r = BeltArc::new("2", Interval::new(0.0, 2.0), a2, 1.0);
        let network = Network::new(
            [l.clone(), r.clone()],
            vec![
                JunctionSpec::source_with_inflow("s", "1", Inflow::Constant { value: a1 * rho_l }),
                JunctionSpec::one_to_one("j", "1", "2"),
                JunctionSpec::sink("t", "2"),
            ],
        );
        let profiles = BTreeMap::from([
            (l.id.clone(), InitialProfile::Constant { value: rho_l }),
            (r.id.clone(), InitialProfile::Constant { value: rho_r }),
        ]);
        let horizon = 0.2;
        let sol = AnalyticSolution::build(&network, &profiles, horizon).unwrap();
        let exact = riemann_one_to_one(rho_l, rho_r, &l, &r).unwrap();
        let h = 0.01;
        for (arc, lo) in [(&l, -2.0), (&r, 0.0)] {
            for k in 0..=400 {
                let x = lo + 2.0 * k as f64 / 400.0;
                for &t in &[0.05, 0.1, 0.2] {
                    let near_wave =
                        x.abs() < h || exact.waves.iter().any(|w| (x - w.speed * t).abs() < h);
                    if near_wave {
                        continue;
                    }
                    let got = sol.evaluate(&arc.id, x, t).unwrap();
                    let want = exact.sample(x, t);
                    assert!(
                        (got - want).abs() < 1e-9,
                        "({rho_l},{rho_r}) arc {} x={x} t={t}: {got} vs {want}",
                        arc.id
                    );
                }
            }
        }
    }
}

#[test]
fn unknown_arc_is_not_evaluated() {
    assert!(builtin("test1")
        .evaluate(&ArcId::new("9"), 0.0, 0.0)
        .is_none());
}
