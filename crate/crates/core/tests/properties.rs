mod common;

use beltflow::analytic::{merge_allocation, InitialProfile};
use beltflow::flux::{regularized_flux, FluxParams};
use proptest::prelude::*;

use common::{godunov_monotone, junction_balance, random_run};

fn params() -> impl Strategy<Value = FluxParams> {
    (
        0.5..4.0f64,
        0.5..2.0f64,
        prop_oneof![Just(0.002), Just(0.01), Just(0.1)],
    )
        .prop_map(|(a, c, d)| FluxParams::new(a, c, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_networks_conserve_mass_and_stay_bounded(run in random_run()) {
        let defect = run.check().map_err(TestCaseError::fail)?;
        prop_assert!(defect < 1e-10, "relative mass defect {defect}");
    }

    #[test]
    fn godunov_flux_is_monotone(p in params()) {
        godunov_monotone(&p, 50).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn junction_rules_balance_exactly(
        p in prop::array::uniform3(params()),
        fr in prop::array::uniform3(0.0..=1.0f64),
        share in 0.0..=1.0f64,
    ) {
        let rho = [0, 1, 2].map(|k| fr[k] * p[k].upper_density());
        junction_balance([&p[0], &p[1], &p[2]], rho, share).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn regularized_flux_is_bounded_by_peak(p in params(), s in 0.0..=1.0f64) {
        let rho = s * p.upper_density();
        let f = regularized_flux(&p, rho);
        prop_assert!(f >= 0.0);
        prop_assert!(f <= p.peak_flux() * (1.0 + 1e-12));
    }

    #[test]
    fn merge_allocation_is_admissible(
        d1 in 0.0..2.0f64, d2 in 0.0..2.0f64, s in 0.0..2.0f64, q in 0.0..=1.0f64,
    ) {
        let m = merge_allocation(d1, d2, s, q);
        prop_assert!(m.f1 >= 0.0 && m.f1 <= d1 + 1e-15);
        prop_assert!(m.f2 >= 0.0 && m.f2 <= d2 + 1e-15);
        prop_assert!(m.f1 + m.f2 <= s + 1e-12);
        // the total is maximal
        prop_assert!((m.f1 + m.f2 - (d1 + d2).min(s)).abs() < 1e-12);
    }

    #[test]
    fn table_profile_integral_matches_quadrature(
        values in prop::collection::vec(0.0..=1.0f64, 2..8),
        u in -1.0..0.0f64, w in 0.0..1.0f64,
    ) {
        let n = values.len() - 1;
        let points = values.iter().enumerate().map(|(j, &v)| (-1.0 + 2.0 * j as f64 / n as f64, v)).collect();
        let profile = InitialProfile::Table { points };
        let m = 4000;
        let h = (w - u) / m as f64;
        let mid: f64 = (0..m).map(|k| profile.value(u + (k as f64 + 0.5) * h)).sum::<f64>() * h;
        prop_assert!((profile.integral(u, w) - mid).abs() < 1e-4);
    }
}
