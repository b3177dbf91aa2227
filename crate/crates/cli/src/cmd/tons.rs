use std::path::PathBuf;

use anyhow::{Context, Result};
use nsrand_core::game::{make_pr_v, product_behavior, NoisyPRParams};
use nsrand_core::lp::Status;
use nsrand_core::rational::{int, parse_rational, to_f64, Rational};
use nsrand_core::tons::{chsh_formula, CausalKind, CausalScenario, SolveOptions, TonsProblem};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::Manifest;
use crate::output::{write_file, Table};
use crate::Failure;

/// Float-mode agreement required between the LP value and the formula.
const FLOAT_MATCH_TOL: f64 = 1e-6;

pub const HEADER: [&str; 6] = ["n", "v", "scenario", "pg_exact", "pg_formula", "match"];

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Single-round game; only `chsh` is available.
    #[arg(long, default_value = "chsh")]
    pub game: String,
    /// Noise parameters of the PR box, comma separated (e.g. 1/4,1/2).
    #[arg(long, value_delimiter = ',', required = true)]
    pub v: Vec<String>,
    /// Number of rounds.
    #[arg(long)]
    pub n: usize,
    /// Causal structure: tons or abns.
    #[arg(long, default_value = "tons")]
    pub scenario: String,
    /// Alice's input in each round, e.g. `01`; all zeros by default.
    #[arg(long)]
    pub xstar: Option<String>,
    /// Solve the full program without the symmetry reduction.
    #[arg(long)]
    pub no_symmetry: bool,
    /// Also write the table, with a manifest, to this file.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn parse_xstar(s: Option<&str>, n: usize) -> Result<Vec<usize>> {
    let Some(s) = s else { return Ok(vec![0; n]) };
    let digits: Vec<usize> = s
        .chars()
        .filter(|c| *c != ',')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Failure::input(format!("--xstar {s:?}: inputs are 0 or 1"))),
        })
        .collect::<std::result::Result<_, _>>()?;
    if digits.len() != n {
        return Err(Failure::input(format!("--xstar {s:?} has {} rounds, expected {n}", digits.len())).into());
    }
    Ok(digits)
}

/// The two-round formula always applies; the three-round one needs `v ≥ √5 − 2`.
fn formula(kind: CausalKind, n: usize, v: &Rational) -> Option<Rational> {
    if kind != CausalKind::Tons || (n == 3 && (v + int(2)) * (v + int(2)) < int(5)) {
        return None;
    }
    chsh_formula(n, v)
}

struct Row {
    cells: Vec<String>,
    ok: bool,
}

fn solve_one(cfg: &RunConfig, a: &Args, s: &CausalScenario, x_star: &[usize], v: &Rational) -> Result<Row> {
    let pr = make_pr_v(&NoisyPRParams::new(v.clone()).with_context(|| format!("--v {v}"))?);
    let marginal = product_behavior(&pr, a.n)?;
    let opts = SolveOptions { mode: cfg.lp_mode(), symmetry: !a.no_symmetry };
    let r = TonsProblem::fixed_marginal(s.clone(), marginal, x_star.to_vec())?.solve(&opts)?;
    if r.status != Status::Optimal {
        return Err(Failure::verification(format!("v = {v}: LP status {:?}", r.status)).into());
    }
    let f = formula(s.kind, a.n, v);
    let (value, matches) = match (&r.value, &f) {
        (Some(x), Some(f)) => (x.to_string(), Some(x == f)),
        (Some(x), None) => (x.to_string(), None),
        (None, Some(f)) => (r.value_f64.to_string(), Some((r.value_f64 - to_f64(f)).abs() <= FLOAT_MATCH_TOL)),
        (None, None) => (r.value_f64.to_string(), None),
    };
    if !r.verified {
        log::warn!("v = {v}: solution failed verification");
    }
    Ok(Row {
        cells: vec![
            a.n.to_string(),
            v.to_string(),
            s.kind.name().to_string(),
            value,
            f.map(|f| f.to_string()).unwrap_or_default(),
            matches.map(|m| m.to_string()).unwrap_or_default(),
        ],
        ok: r.verified && matches != Some(false),
    })
}

pub fn run(cfg: &RunConfig, a: &Args) -> Result<()> {
    if !a.game.eq_ignore_ascii_case("chsh") {
        return Err(Failure::input(format!("--game {:?}: only chsh is supported", a.game)).into());
    }
    let kind: CausalKind = a.scenario.parse()?;
    if a.n == 0 {
        return Err(Failure::input("--n must be at least 1").into());
    }
    let s = CausalScenario::chsh(kind, a.n)?;
    // Reject oversized runs before building the product marginal.
    s.check_size(Some(cfg.lp_mode()))?;
    let x_star = parse_xstar(a.xstar.as_deref(), a.n)?;
    let vs: Vec<Rational> = a
        .v
        .iter()
        .map(|t| parse_rational(t).with_context(|| format!("--v {t:?}")))
        .collect::<Result<_>>()?;

    let rows: Vec<Row> = vs.par_iter().map(|v| solve_one(cfg, a, &s, &x_star, v)).collect::<Result<_>>()?;
    let failed = rows.iter().filter(|r| !r.ok).count();
    let mut table = Table::new(&HEADER);
    table.rows = rows.into_iter().map(|r| r.cells).collect();
    print!("{}", table.render(cfg.output_format)?);
    if let Some(path) = &a.out {
        let manifest = Manifest::new("tons", cfg, a);
        write_file(path, &table.render_file(cfg.output_format, &manifest)?)?;
    }
    if failed > 0 {
        return Err(Failure::verification(format!("{failed} row(s) unverified or not matching the formula")).into());
    }
    Ok(())
}
