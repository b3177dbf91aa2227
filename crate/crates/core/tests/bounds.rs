use nsrand_core::bounds::*;
use nsrand_core::game::{make_chain_game, make_guessing_game};
use nsrand_core::rational::{int, rat};
use proptest::prelude::*;

fn edge_params(n: u64) -> DecayParams {
    let w = quantum_chain_value();
    let k = (w - 8.0 / 9.0) / 2.0;
    DecayParams::new(n, k, k, 0.8).with_omega_star(w)
}

#[test]
fn largest_admissible_target_value_is_feasible() {
    let p = edge_params(1_000_000);
    assert!(p.is_feasible(), "{:?}", p.violations());
    let r = tons_decay_report(&p).unwrap();
    assert_eq!(r.t, (p.omega_star - p.kappa) * 1e6);
}

#[test]
fn target_above_quantum_value_is_infeasible() {
    let p = DecayParams::new(1000, 0.05, 0.0311, 0.8).with_omega_star(0.97);
    let err = tons_decay_report(&p).unwrap_err().to_string();
    assert!(err.contains("(4+√3)/6"), "{err}");
    // Consistent ω* but too large anyway.
    let q = DecayParams::new(1000, 0.05, 0.05, 0.8);
    assert!(!q.is_feasible());
}

#[test]
fn parameter_ranges_are_enforced() {
    assert!(!DecayParams::new(10, 0.1, 0.01, 0.8).is_feasible());
    assert!(!DecayParams::new(10, 0.05, 0.01, 2.0 / 3.0).is_feasible());
    assert!(!DecayParams::new(10, 0.05, 0.01, 1.0).is_feasible());
    assert!(!DecayParams::new(0, 0.05, 0.01, 0.8).is_feasible());
    assert!(DecayParams::new(10, 0.05, 0.01, 0.8).is_feasible());
}

#[test]
fn headline_is_rederivable() {
    for n in [1u64, 1000, 10u64.pow(9), 10u64.pow(14)] {
        let r = tons_decay_report(&edge_params(n)).unwrap();
        let p = &r.params;
        assert_eq!(r.headline.raw, 24.0 * (-p.delta.powi(4) * p.mu * n as f64).exp());
        assert_eq!(r.parallel_rep.raw * 3.0, r.headline.raw);
        assert!(r.headline.clamped <= 1.0 && r.abort.clamped <= 1.0);
    }
}

#[test]
fn useful_regime_onset() {
    let p = edge_params(1);
    let r = tons_decay_report(&p).unwrap();
    let n0 = r.useful_from_n as u64;
    assert!(tons_decay_report(&p.clone().with_n(n0)).unwrap().headline.raw < 1.0);
    assert!(tons_decay_report(&p.clone().with_n(n0 - 1)).unwrap().headline.raw >= 1.0);
}

#[test]
fn default_mu_value() {
    let mu = nsrand_core::rational::to_f64(&default_mu());
    assert!((mu - 3.969e-9).abs() < 1e-12, "{mu}");
    let b = parallel_rep_bound(10u64.pow(9), 0.05, mu).unwrap();
    assert!(b.raw < 8.0 && b.raw > 7.99);
}

#[test]
fn chernoff_reference_point() {
    let c = chernoff_bound(300.0, 0.8, 2.0 / 3.0).unwrap();
    let d = 0.8 * (0.8f64 / (2.0 / 3.0)).ln() + 0.2 * (0.2f64 / (1.0 / 3.0)).ln();
    assert!((c.kl.raw - (-300.0 * d).exp()).abs() < 1e-15);
    assert!(c.kl.raw <= c.quadratic.raw);
}

#[test]
fn pinsker_on_grid() {
    for i in 0..=10 {
        for j in 0..=i {
            let (g, z) = (i as f64 / 10.0, j as f64 / 10.0);
            if z == 0.0 && g > 0.0 {
                continue;
            }
            assert!(binary_kl(g, z) >= 2.0 * (g - z).powi(2) - 1e-15, "γ = {g}, ζ = {z}");
        }
    }
}

#[test]
fn rate_identity_is_exact() {
    assert_eq!(rat(1, 27) * rat(1, 27), rat(10, 9) * rat(10, 9) * int(6i64.pow(7)) * default_mu());
}

#[test]
fn pi_min_of_built_game() {
    assert_eq!(make_guessing_game(&make_chain_game()).unwrap().pi_min(), rat(1, 27));
}

#[test]
fn mu_recomputed_from_lp() {
    let r = mu_consistency_check().unwrap();
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.alpha, rat(10, 9));
}

#[test]
fn csv_fields() {
    let r = tons_decay_report(&edge_params(500)).unwrap();
    let f = r.csv_fields();
    assert_eq!(f.len(), DECAY_CSV_HEADER.len());
    assert_eq!(f[0], "500");
}

proptest! {
    #[test]
    fn headline_non_increasing_in_n(a in 1u64..10u64.pow(12), b in 1u64..10u64.pow(12)) {
        let (lo, hi) = (a.min(b), a.max(b));
        let p = edge_params(1);
        let x = tons_decay_report(&p.clone().with_n(lo)).unwrap();
        let y = tons_decay_report(&p.with_n(hi)).unwrap();
        prop_assert!(y.headline.raw <= x.headline.raw);
        prop_assert!(y.abort.raw <= x.abort.raw);
    }

    #[test]
    fn parallel_rep_monotone_in_each_argument(n in 1u64..10u64.pow(10), d in 0.001f64..0.1, m in 1e-10f64..1e-6, s in 1.0f64..2.0) {
        let base = parallel_rep_bound(n, d, m).unwrap().raw;
        prop_assert!(parallel_rep_bound(((n as f64) * s) as u64, d, m).unwrap().raw <= base);
        prop_assert!(parallel_rep_bound(n, d * s, m).unwrap().raw <= base);
        prop_assert!(parallel_rep_bound(n, d, m * s).unwrap().raw <= base);
    }

    #[test]
    fn conditional_bound_below_headline_when_abort_small(n in 1u64..10u64.pow(8)) {
        let r = tons_decay_report(&edge_params(n)).unwrap();
        if 1.0 - r.abort.raw >= 1.0 / 3.0 {
            prop_assert!(r.guess_given_no_abort.raw <= r.headline.raw * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pinsker(g in 0.0f64..=1.0, z in 0.001f64..0.999) {
        let (g, z) = (g.max(z), g.min(z));
        prop_assert!(binary_kl(g, z) >= 2.0 * (g - z).powi(2) - 1e-12);
    }

    #[test]
    fn clamped_values_are_probabilities(n in 0u64..100, k in 0.001f64..1.0) {
        let b = azuma_abort_bound(n, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.clamped));
        prop_assert_eq!(b.raw, 2.0 * (-(n as f64) * k * k / 2.0).exp());
    }
}
