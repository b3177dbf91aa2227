use std::time::Instant;

use nsrand_core::game::{make_chain_game, make_guessing_game, make_magic_square_game};
use nsrand_core::lp::verify_certificate;
use nsrand_core::ns::{
    alpha_slope, chain_guessing_eps_formula, chain_ns_guessing_curve, chain_ns_line, eps_ns_lp, eps_ns_value,
    ns_value, single_round_guessing, GuessingProblem, SlopeReport, ValueRelation,
};
use nsrand_core::rational::{int, one, rat};

#[test]
fn chain_guessing_game_ns_value_is_eight_ninths() {
    let gg = make_guessing_game(&make_chain_game()).unwrap();
    let t = Instant::now();
    assert_eq!(ns_value(&gg).unwrap(), rat(8, 9));
    assert!(t.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn eps_ns_values_follow_affine_law() {
    let gg = make_guessing_game(&make_chain_game()).unwrap();
    for eps in [rat(1, 40), rat(1, 20), rat(1, 10)] {
        let rep = eps_ns_value(&gg, &eps).unwrap();
        assert_eq!(rep.value, (int(8) + int(10) * &eps) / int(9), "eps = {eps}");
        assert_eq!(rep.value, chain_guessing_eps_formula(&eps));
        assert!(verify_certificate(&eps_ns_lp(&gg, &eps).unwrap(), &rep.solution));
        let names: Vec<&str> = rep.dual_groups.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names.len(), 7);
        assert_eq!(names[0], "N");
    }
    assert_eq!(eps_ns_value(&gg, &rat(1, 5)).unwrap().value, one());
}

#[test]
fn alpha_slope_is_ten_ninths() {
    let gg = make_guessing_game(&make_chain_game()).unwrap();
    let rep = alpha_slope(&gg, &[rat(1, 40), rat(1, 20), rat(1, 10)]).unwrap();
    assert_eq!(rep, SlopeReport::Affine { slope: rat(10, 9), intercept: rat(8, 9) });
    assert!(alpha_slope(&gg, &[rat(1, 20)]).is_err());
}

#[test]
fn chain_line_matches_closed_form() {
    let ws = [int(4), rat(9, 2), int(5), rat(11, 2), int(6)];
    let curve = chain_ns_guessing_curve(&ws).unwrap();
    for p in curve {
        assert_eq!(p.pg, chain_ns_line(&p.w), "w = {}", p.w);
    }
    assert!(chain_ns_guessing_curve(&[rat(13, 2)]).is_err());
}

#[test]
fn chain_guessing_independent_of_reference_input() {
    for w in [rat(9, 2), rat(23, 4)] {
        let vals: Vec<_> = (0..3)
            .map(|y0| GuessingProblem::chain_i3(w.clone(), ValueRelation::Eq).with_reference(y0).solve().unwrap().value)
            .collect();
        assert!(vals.iter().all(|v| *v == vals[0]), "{vals:?}");
    }
}

#[test]
fn lower_bounded_value_gives_non_increasing_guessing() {
    let mut prev = None;
    for k in 0..=4 {
        let w = int(4) + rat(k, 2);
        let v = GuessingProblem::chain_i3(w, ValueRelation::Ge).solve().unwrap().value;
        if let Some(p) = prev {
            assert!(v <= p);
        }
        prev = Some(v);
    }
}

#[test]
fn magic_square_perfect_value_gives_no_randomness() {
    let g = make_magic_square_game();
    for x in 0..3 {
        assert_eq!(single_round_guessing(&g, x, one(), ValueRelation::Eq).unwrap(), Some(one()), "x* = {x}");
    }
}

#[test]
fn infeasible_value_reports_none() {
    let g = make_chain_game();
    assert_eq!(single_round_guessing(&g, 0, rat(11, 10), ValueRelation::Eq).unwrap(), None);
}
