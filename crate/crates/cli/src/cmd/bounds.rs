use std::path::PathBuf;

use anyhow::Result;
use nsrand_core::bounds::{mu_consistency_check, quantum_chain_value, tons_decay_report, DecayParams, DECAY_CSV_HEADER};
use nsrand_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::Manifest;
use crate::output::{write_file, Table};
use crate::Failure;

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Slack δ; defaults to half the gap between the quantum and NS values.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Abort slack κ; same default as δ.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, default_value_t = 0.8)]
    pub gamma: f64,
    /// Threshold ω*; defaults to κ + δ + 8/9.
    #[arg(long)]
    pub omega_star: Option<f64>,
    /// Overrides the default μ.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Round counts, comma separated [default: 10^0, 10^1, ..., 10^16].
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Also recompute μ from the chain guessing game and check it.
    #[arg(long)]
    pub check_constants: bool,
}

pub fn run(cfg: &RunConfig, a: &Args) -> Result<()> {
    let half_gap = (quantum_chain_value() - 8.0 / 9.0) / 2.0;
    let delta = a.delta.unwrap_or(half_gap);
    let kappa = a.kappa.unwrap_or(half_gap);
    let mut p = DecayParams::new(1, delta, kappa, a.gamma);
    if let Some(w) = a.omega_star {
        p = p.with_omega_star(w);
    }
    if let Some(mu) = a.mu {
        p.mu = mu;
    }
    let ns: Vec<u64> = if a.n.is_empty() { (0..=16).map(|e| 10u64.pow(e)).collect() } else { a.n.clone() };
    if let Some(bad) = ns.iter().find(|&&n| n == 0) {
        return Err(Failure::input(format!("--n values must be positive, got {bad}")).into());
    }
    let bad = p.violations();
    if !bad.is_empty() {
        return Err(Error::Infeasible(format!("bounds parameters violate {}", bad.join("; "))).into());
    }

    let reports = ns.par_iter().map(|&n| tons_decay_report(&p.clone().with_n(n))).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&DECAY_CSV_HEADER);
    table.rows = reports.iter().map(|r| r.csv_fields().to_vec()).collect();
    match &a.out {
        Some(path) => write_file(path, &table.render_file(cfg.output_format, &Manifest::new("bounds", cfg, a))?)?,
        None => print!("{}", table.render(cfg.output_format)?),
    }
    if let Some(r) = reports.first() {
        eprintln!("headline bound drops below 1 from n ≈ {:.3e}", r.useful_from_n);
    }

    if a.check_constants {
        let m = mu_consistency_check()?;
        eprintln!(
            "{} constants: π_min = {}, α = {}, μ = {}",
            if m.passed() { "PASS" } else { "FAIL" },
            m.pi_min,
            m.alpha,
            m.mu
        );
        if !m.passed() {
            return Err(Failure::verification("μ does not match π_min²/(α²·6⁷)").into());
        }
    }
    Ok(())
}
