use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nsrand_bench::{bundled_ks, pr_product};
use nsrand_core::chain_entropy::{emit_min_entropy_curves, uniform_grid};
use nsrand_core::game::{make_chain_game, make_guessing_game};
use nsrand_core::ks::{run_attack, Construction, DEFAULT_TOL};
use nsrand_core::lp::{solve_exact, solve_float, DEFAULT_FLOAT_TOLERANCE};
use nsrand_core::ns::{eps_ns_value, ns_value_lp};
use nsrand_core::rational::rat;
use nsrand_core::tons::{CausalKind, CausalScenario, SolveOptions, TonsProblem};

fn ns_values(c: &mut Criterion) {
    let gg = make_guessing_game(&make_chain_game()).unwrap();
    let lp = ns_value_lp(&gg).unwrap();
    let mut g = c.benchmark_group("ns_value");
    g.bench_function("chain_guessing_exact", |b| b.iter(|| solve_exact(&lp).unwrap()));
    g.bench_function("chain_guessing_float", |b| b.iter(|| solve_float(&lp, DEFAULT_FLOAT_TOLERANCE).unwrap()));
    g.bench_function("chain_guessing_eps_1_20", |b| b.iter(|| eps_ns_value(&gg, &rat(1, 20)).unwrap()));
    g.finish();
}

fn tons_two_rounds(c: &mut Criterion) {
    let mut g = c.benchmark_group("tons_n2");
    g.sample_size(10);
    for symmetry in [true, false] {
        let s = CausalScenario::chsh(CausalKind::Tons, 2).unwrap();
        let p = TonsProblem::fixed_marginal(s, pr_product(rat(1, 2), 2), vec![0, 0]).unwrap();
        let opts = SolveOptions { symmetry, ..SolveOptions::default() };
        let id = BenchmarkId::new("exact", if symmetry { "reduced" } else { "full" });
        g.bench_function(id, |b| b.iter(|| p.solve(&opts).unwrap()));
    }
    g.finish();
}

fn ks_pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("ks_attack");
    g.sample_size(10);
    for name in ["single_basis", "cabello"] {
        let ks = bundled_ks(name);
        g.bench_function(name, |b| b.iter(|| run_attack(&ks, 0, DEFAULT_TOL, Construction::Coupling).unwrap().unwrap()));
    }
    g.finish();
}

fn chain_curves(c: &mut Criterion) {
    let grid = uniform_grid(201);
    c.bench_function("chain_curves_201", |b| b.iter(|| emit_min_entropy_curves(&grid).unwrap()));
}

criterion_group!(benches, ns_values, tons_two_rounds, ks_pipeline, chain_curves);
criterion_main!(benches);
