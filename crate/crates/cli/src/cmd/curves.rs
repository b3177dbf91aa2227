use std::path::PathBuf;

use anyhow::Result;
use nsrand_core::chain_entropy::{curve_summary, emit_min_entropy_curves, CURVE_HEADER};
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::Manifest;
use crate::output::{pretty, with_manifest, write_file, Table};
use crate::Failure;

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Grid points in the chain value w.
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Smallest w (at least 4).
    #[arg(long, default_value_t = 4.0)]
    pub w_min: f64,
    /// Largest w (at most 6).
    #[arg(long, default_value_t = 6.0)]
    pub w_max: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Also write endpoint values and the round-trip error to this JSON file.
    #[arg(long)]
    #[serde(skip)]
    pub summary: Option<PathBuf>,
}

fn grid(a: &Args) -> Result<Vec<f64>> {
    if a.points < 2 {
        return Err(Failure::input(format!("--points must be at least 2, got {}", a.points)).into());
    }
    if !(4.0 <= a.w_min && a.w_min < a.w_max && a.w_max <= 6.0) {
        return Err(Failure::input(format!("need 4 ≤ w_min < w_max ≤ 6, got [{}, {}]", a.w_min, a.w_max)).into());
    }
    let last = (a.points - 1) as f64;
    Ok((0..a.points).map(|k| a.w_min + (a.w_max - a.w_min) * k as f64 / last).collect())
}

pub fn run(cfg: &RunConfig, a: &Args) -> Result<()> {
    let rows = emit_min_entropy_curves(&grid(a)?)?;
    let mut table = Table::new(&CURVE_HEADER);
    table.rows = rows.iter().map(|r| r.fields().to_vec()).collect();
    let manifest = Manifest::new("curves", cfg, a);
    match &a.out {
        Some(path) => write_file(path, &table.render_file(cfg.output_format, &manifest)?)?,
        None => print!("{}", table.render(cfg.output_format)?),
    }
    if let Some(path) = &a.summary {
        let s = serde_json::to_value(curve_summary(a.points)?)?;
        write_file(path, &pretty(&with_manifest(s, &manifest)))?;
    }
    Ok(())
}
