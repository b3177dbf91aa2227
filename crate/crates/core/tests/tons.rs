use std::collections::BTreeSet;
use std::time::Instant;

use nsrand_core::game::{make_chsh_game, make_pr_v, product_behavior, Behavior, NoisyPRParams, Scenario};
use nsrand_core::index::Radix;
use nsrand_core::lp::{solve_exact, LinProgram, Mode, Relation, Sense, Status};
use nsrand_core::ns::{add_ns_rows, GuessingProblem, ValueRelation};
use nsrand_core::rational::{int, one, rat, zero, Rational};
use nsrand_core::tons::{
    build_causal_constraints, chsh_formula, iid_guessing_baseline, tons_guessing_probability, CausalKind,
    CausalScenario, Encoding, SolveOptions, TonsProblem,
};
use proptest::prelude::*;

fn pr(v: Rational, n: usize) -> Behavior {
    product_behavior(&make_pr_v(&NoisyPRParams::new(v).unwrap()), n).unwrap()
}

fn value(kind: CausalKind, n: usize, v: Rational, x_star: Vec<usize>, opts: SolveOptions) -> Rational {
    let s = CausalScenario::chsh(kind, n).unwrap();
    let r = TonsProblem::fixed_marginal(s, pr(v, n), x_star).unwrap().solve(&opts).unwrap();
    assert!(r.verified);
    r.value.unwrap()
}

#[test]
fn two_rounds_match_closed_form() {
    for v in [zero(), rat(1, 4), rat(1, 2), rat(3, 4), one()] {
        for x_star in [vec![0, 0], vec![1, 0]] {
            let t = Instant::now();
            let got = value(CausalKind::Tons, 2, v.clone(), x_star.clone(), SolveOptions::default());
            assert_eq!(got, chsh_formula(2, &v).unwrap(), "v = {v}, x* = {x_star:?}");
            assert!(t.elapsed().as_secs_f64() < 60.0);
        }
    }
}

#[test]
fn three_rounds_match_closed_form() {
    for v in [rat(1, 4), rat(1, 2), one()] {
        let t = Instant::now();
        let got = value(CausalKind::Tons, 3, v.clone(), vec![0, 0, 0], SolveOptions::default());
        assert_eq!(got, chsh_formula(3, &v).unwrap(), "v = {v}");
        assert!(t.elapsed().as_secs_f64() < 1800.0);
    }
}

#[test]
fn three_rounds_float_mode() {
    let s = CausalScenario::chsh(CausalKind::Tons, 3).unwrap();
    let p = TonsProblem::fixed_marginal(s, pr(rat(1, 2), 3), vec![0, 1, 0]).unwrap();
    let r = p.solve(&SolveOptions { mode: Mode::Float(1e-9), symmetry: true }).unwrap();
    assert!((r.value_f64 - 0.5625).abs() < 1e-6, "{}", r.value_f64);
}

#[test]
fn reference_input_does_not_matter() {
    let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
    let base = TonsProblem::fixed_marginal(s, pr(rat(1, 2), 2), vec![0, 1]).unwrap();
    let opts = SolveOptions { mode: Mode::Exact, symmetry: false };
    let mut seen = BTreeSet::new();
    for y0 in Radix::uniform(2, 2).iter() {
        let r = base.clone().with_reference(y0).unwrap().solve(&opts).unwrap();
        seen.insert(r.value.unwrap());
    }
    assert_eq!(seen.len(), 1, "{seen:?}");
}

#[test]
fn chained_and_full_encodings_agree() {
    let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
    let p = TonsProblem::fixed_marginal(s, pr(rat(3, 4), 2), vec![0, 0]).unwrap();
    let a = p.solve(&SolveOptions::default()).unwrap();
    let b = p.with_encoding(Encoding::Full).solve(&SolveOptions::default()).unwrap();
    assert_eq!(a.value, b.value);
}

#[test]
fn box_no_signalling_allows_at_least_as_much() {
    for v in [rat(1, 4), rat(1, 2), one()] {
        let t = value(CausalKind::Tons, 2, v.clone(), vec![0, 0], SolveOptions::default());
        let a = value(CausalKind::Abns, 2, v.clone(), vec![0, 0], SolveOptions::default());
        assert!(a >= t, "v = {v}: abns {a} < tons {t}");
    }
}

#[test]
fn value_non_increasing_in_noise_parameter() {
    let vals: Vec<Rational> = (0..=4)
        .map(|k| value(CausalKind::Tons, 2, rat(k, 4), vec![0, 0], SolveOptions::default()))
        .collect();
    assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{vals:?}");
}

#[test]
fn round_relabeling_of_target_input() {
    let a = value(CausalKind::Tons, 2, rat(1, 2), vec![0, 1], SolveOptions::default());
    let b = value(CausalKind::Tons, 2, rat(1, 2), vec![1, 0], SolveOptions::default());
    assert_eq!(a, b);
    let a = value(CausalKind::Tons, 3, rat(1, 2), vec![0, 0, 1], SolveOptions::default());
    let b = value(CausalKind::Tons, 3, rat(1, 2), vec![1, 0, 0], SolveOptions::default());
    assert_eq!(a, b);
}

type RowSet = BTreeSet<(Vec<usize>, Vec<usize>)>;

#[test]
fn one_round_is_ordinary_no_signalling() {
    let s = CausalScenario::chsh(CausalKind::Tons, 1).unwrap();
    let tons: RowSet = build_causal_constraints(&s, Encoding::Chained)
        .unwrap()
        .into_iter()
        .map(|r| {
            let (mut p, mut m) = (r.plus, r.minus);
            p.sort();
            m.sort();
            (p, m)
        })
        .collect();
    let mut lp = LinProgram::new(16, Sense::Max);
    let g = lp.group("ns");
    add_ns_rows(&mut lp, g, &Scenario::bipartite(2, 2, 2, 2), 0).unwrap();
    let ns: RowSet = lp
        .constraints()
        .iter()
        .map(|c| {
            let p = c.coeffs.iter().filter(|(_, a)| *a > zero()).map(|(j, _)| *j).collect();
            let m = c.coeffs.iter().filter(|(_, a)| *a < zero()).map(|(j, _)| *j).collect();
            (p, m)
        })
        .collect();
    assert_eq!(tons, ns);
}

/// Counts constraint keys straight from the definition: for each level `i`,
/// one equality per fixed (other party's strings, own output and input
/// prefixes) and per nonzero own-input suffix.
fn enumerate_full_rows(kind: CausalKind, n: u32) -> usize {
    let levels: Vec<u32> = match kind {
        CausalKind::Tons => (0..n).collect(),
        CausalKind::Abns => vec![0],
    };
    let mut keys = BTreeSet::new();
    let strings = |k: u32| (0..2usize.pow(k)).map(move |s| (0..k).map(|r| (s >> (k - 1 - r)) & 1).collect::<Vec<_>>());
    for dir in 0..2 {
        for &i in &levels {
            for qo in strings(n) {
                for qi in strings(n) {
                    for po in strings(n) {
                        for pi in strings(n) {
                            if pi[i as usize..].iter().all(|&d| d == 0) {
                                continue;
                            }
                            keys.insert((dir, i, qo.clone(), qi.clone(), po[..i as usize].to_vec(), pi.clone()));
                        }
                    }
                }
            }
        }
    }
    keys.len()
}

#[test]
fn constraint_count_matches_enumeration() {
    for kind in [CausalKind::Tons, CausalKind::Abns] {
        let s = CausalScenario::chsh(kind, 2).unwrap();
        let rows = build_causal_constraints(&s, Encoding::Full).unwrap();
        assert_eq!(rows.len(), enumerate_full_rows(kind, 2), "{kind:?}");
    }
}

#[test]
fn iid_baseline_is_power_of_single_round() {
    let g = make_chsh_game();
    let single = make_pr_v(&NoisyPRParams::new(rat(1, 2)).unwrap());
    let one_round = iid_guessing_baseline(&g, &single, 1).unwrap();
    assert_eq!(iid_guessing_baseline(&g, &single, 2).unwrap(), &one_round * &one_round);
    let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
    let two = tons_guessing_probability(&g, &pr(rat(1, 2), 2), &[0, 0], &s).unwrap().unwrap();
    assert!(two > &one_round * &one_round);
}

#[test]
fn signalling_marginal_is_infeasible() {
    // Alice outputs Bob's input.
    let sc = Scenario::bipartite(2, 2, 2, 2);
    let mut table = vec![zero(); 16];
    for x in 0..2 {
        for y in 0..2 {
            table[sc.event_of(&[y, 0], &[x, y])] = one();
        }
    }
    let b = Behavior::new(sc, table, false).unwrap();
    let s = CausalScenario::chsh(CausalKind::Tons, 1).unwrap();
    assert_eq!(tons_guessing_probability(&make_chsh_game(), &b, &[0], &s).unwrap(), None);
}

#[test]
fn per_round_value_mode_reduces_to_single_round_guessing() {
    let g = make_chsh_game();
    let w = rat(7, 8);
    let s = CausalScenario::chsh(CausalKind::Tons, 1).unwrap();
    let p = TonsProblem::per_round_value(s, g.clone(), w.clone(), vec![1]).unwrap();
    let r = p.solve(&SolveOptions::default()).unwrap();
    let single = GuessingProblem::for_game(&g, 1, w, ValueRelation::Eq).unwrap().solve().unwrap();
    assert_eq!(r.value.unwrap(), single.value);
}

#[test]
fn per_round_value_mode_runs_at_two_rounds() {
    let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
    let p = TonsProblem::per_round_value(s, make_chsh_game(), rat(7, 8), vec![0, 0]).unwrap();
    let r = p.solve(&SolveOptions::default()).unwrap();
    assert_eq!(r.status, Status::Optimal);
    let v = r.value.unwrap();
    assert!(v > zero() && v <= one());
}

/// Vertices of the normalized two-round TONS polytope found by random
/// objectives.
fn tons_vertex(weights: &[i64]) -> Vec<Rational> {
    let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
    let block = s.block().unwrap();
    let mut lp = LinProgram::new(block.n_events(), Sense::Max);
    lp.set_objective(weights.iter().enumerate().map(|(j, &w)| (j, int(w))).collect()).unwrap();
    for row in build_causal_constraints(&s, Encoding::Chained).unwrap() {
        let coeffs = row.plus.iter().map(|&j| (j, one())).chain(row.minus.iter().map(|&j| (j, -one()))).collect();
        lp.add_constraint(coeffs, Relation::Eq, zero()).unwrap();
    }
    let norm = (0..block.n_out()).map(|o| (block.event(o, 0), one())).collect();
    lp.add_constraint(norm, Relation::Eq, one()).unwrap();
    let sol = solve_exact(&lp).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    sol.primal
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn time_ordered_points_satisfy_box_constraints(weights in proptest::collection::vec(-4i64..=4, 256)) {
        let p = tons_vertex(&weights);
        let abns = CausalScenario::chsh(CausalKind::Abns, 2).unwrap();
        for row in build_causal_constraints(&abns, Encoding::Full).unwrap() {
            let lhs: Rational = row.plus.iter().map(|&j| &p[j]).sum::<Rational>()
                - row.minus.iter().map(|&j| &p[j]).sum::<Rational>();
            prop_assert_eq!(lhs, zero());
        }
    }
}
