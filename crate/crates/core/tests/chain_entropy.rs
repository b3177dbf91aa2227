use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use nsrand_core::chain_entropy::*;
use nsrand_core::game::make_chain_game;
use nsrand_core::ns::chain_ns_guessing_curve;
use nsrand_core::rational::{int, rat, to_f64};
use proptest::prelude::*;

fn open_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * k as f64 / n as f64).collect()
}

#[test]
fn closed_form_matches_density_matrix() {
    for t in open_grid(200) {
        let oracle = QubitStrategy::for_theta(t).unwrap().chain_value();
        let closed = quantum_value(t).unwrap();
        assert!((oracle - closed).abs() < 1e-10, "θ = {t}: {oracle} vs {closed}");
    }
}

#[test]
fn value_line_of_the_derivation() {
    // 2 cos φ_b (cos φ_a − 1) + 2 sin φ_a (sin φ_b + 1) sin(θ/2)
    for t in open_grid(50) {
        let p = angles_from_theta(t).unwrap();
        let w = 2.0 * p.cos_b() * (p.cos_a() - 1.0) + 2.0 * p.sin_a() * (p.sin_b() + 1.0) * (t / 2.0).sin();
        assert!((w - quantum_value(t).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn round_trip_through_the_cubic() {
    let errs = round_trip_errors(200).unwrap();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn endpoint_values() {
    assert!((pg_quantum_of_w(4.0).unwrap() - 1.0).abs() < 1e-10);
    assert!((pg_quantum_of_w(max_quantum_value()).unwrap() - 0.5).abs() < 1e-10);
    assert!((quantum_value(0.0).unwrap() - 4.0).abs() < 1e-10);
    // Just inside the ends, away from the special-cased branches.
    assert!((pg_quantum_of_w(4.0 + 1e-12).unwrap() - 1.0).abs() < 1e-5);
    assert!((pg_quantum_of_w(max_quantum_value() - 1e-12).unwrap() - 0.5).abs() < 1e-5);
    assert!(pg_quantum_of_w(3.9).is_err());
    assert!(pg_quantum_of_w(5.3).is_err());
    assert_eq!(pg_ns_of_w(6.0).unwrap(), 0.5);
    assert_eq!(pg_ns_of_w(4.0).unwrap(), 1.0);
    assert!(pg_ns_of_w(6.5).is_err());
}

#[test]
fn fixed_strategy_reaches_quantum_game_value() {
    let v = fixed_strategy_game_value(&make_chain_game()).unwrap();
    assert!((v - chain_quantum_game_value()).abs() < 1e-12, "{v}");
}

#[test]
fn angle_identities() {
    let n = 50;
    for k in 0..=n {
        let t = (PI - 1e-3) * k as f64 / n as f64;
        let p = angles_from_theta(t).unwrap();
        for (i, r) in p.identity_residuals().iter().enumerate() {
            assert!(r.abs() < 1e-10, "θ = {t}, identity {i}: {r}");
        }
        assert!(p.phi_a >= PI / 2.0 && p.phi_a <= PI);
        assert!(p.phi_b > PI / 2.0 && p.phi_b <= PI);
    }
    let r = angles_at_pi().identity_residuals();
    assert!(r.iter().all(|x| x.abs() < 1e-12), "{r:?}");
}

#[test]
fn strategy_is_physical() {
    for t in [0.0, 0.3, 1.0, PI / 2.0, 2.5, PI - 1e-3] {
        let q = QubitStrategy::for_theta(t).unwrap();
        assert!((q.state.trace().re - 1.0).abs() < 1e-12);
        let eig = SymmetricEigen::new(q.state).eigenvalues;
        assert!(eig.iter().all(|&l| l > -1e-12), "{eig:?}");
        for o in q.alice.iter().chain(&q.bob) {
            assert!((o * o - C2::identity()).norm() < 1e-12);
            assert!((o - o.adjoint()).norm() < 1e-15);
        }
    }
}

#[test]
fn reduced_state_matches_pauli_expansion() {
    for t in open_grid(40).into_iter().chain([PI]) {
        let d = (reduced_state_from_purification(t) - pauli_state(t)).norm();
        assert!(d < 1e-12, "θ = {t}: {d}");
    }
}

#[test]
fn monotone_in_theta() {
    let grid = theta_grid(2001);
    let w: Vec<f64> = grid.iter().map(|&t| quantum_value(t).unwrap()).collect();
    let g: Vec<f64> = grid.iter().map(|&t| guessing_from_theta(t).unwrap()).collect();
    assert!(w.windows(2).all(|p| p[1] > p[0]));
    assert!(g.windows(2).all(|p| p[1] < p[0]));
}

#[test]
fn selected_root_solves_the_cubic() {
    for t in open_grid(100).into_iter().skip(1) {
        let w = quantum_value(t).unwrap();
        let x = select_cubic_root(w).unwrap();
        assert!(cubic_relative_residual(w, x) < 1e-6, "w = {w}");
    }
}

#[test]
fn ns_line_matches_lp() {
    let ws = [int(4), rat(17, 4), rat(9, 2), int(5), int(6)];
    for p in chain_ns_guessing_curve(&ws).unwrap() {
        assert_eq!(pg_ns_of_w(to_f64(&p.w)).unwrap(), to_f64(&p.pg), "w = {}", p.w);
    }
}

#[test]
fn curves() {
    let rows = emit_min_entropy_curves(&uniform_grid(201)).unwrap();
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0].hmin_quantum, Some(0.0));
    assert!((rows[200].hmin_ns - 1.0).abs() < 1e-15);
    for r in &rows {
        match r.hmin_quantum {
            Some(h) => {
                assert!(r.w <= max_quantum_value());
                assert!(h >= r.hmin_ns - 1e-12, "w = {}", r.w);
                assert!((0.0..=1.0).contains(&h));
            }
            None => {
                assert!(r.w > max_quantum_value());
                assert_eq!(r.fields()[1], "");
            }
        }
    }
    let s = curve_summary(200).unwrap();
    assert!(s.max_round_trip_error < 1e-8);
}

proptest! {
    #[test]
    fn round_trip_at_random_theta(t in 0.0..PI) {
        let w = quantum_value(t).unwrap().clamp(4.0, max_quantum_value());
        let err = (pg_quantum_of_w(w).unwrap() - guessing_from_theta(t).unwrap()).abs();
        prop_assert!(err < 1e-8, "θ = {}, err = {}", t, err);
    }

    #[test]
    fn guessing_stays_in_range(w in 4.0..=6.0f64) {
        let pg = pg_ns_of_w(w).unwrap();
        prop_assert!((0.5..=1.0).contains(&pg));
        if w <= max_quantum_value() {
            let q = pg_quantum_of_w(w).unwrap();
            prop_assert!((0.5..=1.0).contains(&q));
            prop_assert!(q <= pg + 1e-12);
        }
    }
}
