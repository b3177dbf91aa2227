use std::path::PathBuf;

use anyhow::{Context, Result};
use nsrand_core::game::game_from_json;
use nsrand_core::lp::{check_certificate, solve_exact, solve_float, Status};
use nsrand_core::ns::{eps_ns_lp, ns_value_lp};
use nsrand_core::rational::{parse_rational, Rational};
use serde::Serialize;
use serde_json::json;

use crate::config::{ModeName, RunConfig};
use crate::manifest::Manifest;
use crate::output::{file_stem, output_path, pretty, write_file};
use crate::Failure;

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Game JSON file.
    pub game: PathBuf,
    /// Solve the ε-relaxed program instead.
    #[arg(long)]
    pub eps: Option<String>,
    /// Certificate path [default: <output_dir>/<game>.certificate.json].
    #[arg(long)]
    #[serde(skip)]
    pub certificate: Option<PathBuf>,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

pub fn run(cfg: &RunConfig, a: &Args) -> Result<()> {
    let mut manifest = Manifest::new("ns-value", cfg, a);
    let text = manifest.read_input(&a.game)?;
    let game = game_from_json(&text).with_context(|| format!("parsing game {}", a.game.display()))?;
    let eps = a
        .eps
        .as_deref()
        .map(|s| parse_rational(s).context("--eps"))
        .transpose()?;
    let lp = match &eps {
        Some(e) => eps_ns_lp(&game, e)?,
        None => ns_value_lp(&game)?,
    };
    let cert_path = output_path(cfg, a.certificate.as_deref(), &format!("{}.certificate.json", file_stem(&a.game)));
    let common = json!({
        "game": a.game.display().to_string(),
        "epsilon": eps.as_ref().map(ToString::to_string),
        "mode": cfg.mode,
    });

    let (body, verified) = match cfg.mode {
        ModeName::Exact => {
            let sol = solve_exact(&lp)?;
            if sol.status != Status::Optimal {
                return Err(Failure::verification(format!("LP status {:?}", sol.status)).into());
            }
            let rep = check_certificate(&lp, &sol);
            println!("{}", sol.value);
            let body = json!({
                "status": sol.status,
                "value": sol.value.to_string(),
                "certificate_verified": rep.ok,
                "reasons": rep.reasons,
                "primal": strings(&sol.primal),
                "dual": strings(&sol.dual),
            });
            (body, rep.ok)
        }
        ModeName::Float => {
            let sol = solve_float(&lp, cfg.float_tolerance)?;
            if sol.status != Status::Optimal {
                return Err(Failure::verification(format!("LP status {:?}", sol.status)).into());
            }
            println!("{}", sol.value);
            let ok = sol.within_tolerance();
            let body = json!({
                "status": sol.status,
                "value": sol.value,
                "dual_value": sol.dual_value,
                "certificate_verified": ok,
                "max_violation": sol.max_violation,
                "max_dual_violation": sol.max_dual_violation,
                "tolerance": sol.tolerance,
                "primal": sol.primal,
                "dual": sol.dual,
            });
            (body, ok)
        }
    };
    let mut doc = common;
    doc.as_object_mut().expect("object").extend(body.as_object().expect("object").clone());
    doc["manifest"] = manifest.to_value();
    write_file(&cert_path, &pretty(&doc))?;
    if !verified {
        return Err(Failure::verification(format!("certificate check failed; see {}", cert_path.display())).into());
    }
    Ok(())
}
