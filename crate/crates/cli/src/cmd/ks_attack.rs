use std::path::PathBuf;

use anyhow::{Context, Result};
use nsrand_core::game::behavior_to_json;
use nsrand_core::ks::{run_attack, Check, Construction, KsSet, PipelineError};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::manifest::Manifest;
use crate::output::{file_stem, output_path, pretty, with_manifest, write_file};
use crate::Failure;

#[derive(Clone, Copy, Debug, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionArg {
    Coupling,
    Verbatim,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// KS set JSON file.
    #[arg(long)]
    pub ks: PathBuf,
    /// Index of the target basis.
    #[arg(long, default_value_t = 0)]
    pub xstar: usize,
    /// How each assignment becomes a bipartite behavior.
    #[arg(long, value_enum, default_value = "coupling")]
    pub construction: ConstructionArg,
    /// Behavior path [default: <output_dir>/<ks>_x<xstar>_behavior.json].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Report path [default: <output_dir>/<ks>_x<xstar>_report.json].
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

fn print_check(c: &Check) {
    let tag = if c.passed { "PASS" } else { "FAIL" };
    if c.detail.is_empty() {
        println!("{tag} {}", c.name);
    } else {
        println!("{tag} {}: {}", c.name, c.detail);
    }
}

pub fn run(cfg: &RunConfig, a: &Args) -> Result<()> {
    let mut manifest = Manifest::new("ks-attack", cfg, a);
    let text = manifest.read_input(&a.ks)?;
    let ks = KsSet::from_json(&text).with_context(|| format!("KS set {}", a.ks.display()))?;
    let construction = match a.construction {
        ConstructionArg::Coupling => Construction::Coupling,
        ConstructionArg::Verbatim => Construction::Verbatim,
    };
    let stem = format!("{}_x{}", file_stem(&a.ks), a.xstar);
    let report_path = output_path(cfg, a.report.as_deref(), &format!("{stem}_report.json"));
    let head = json!({
        "ks": a.ks.display().to_string(),
        "x_star": a.xstar,
        "construction": a.construction,
    });

    let rep = match run_attack(&ks, a.xstar, cfg.orth_tolerance, construction)? {
        Ok(rep) => rep,
        Err(PipelineError::NoAssignment { x_star, outcomes }) => {
            for e in &outcomes {
                println!("FAIL assignment: no usable assignment is 1 on outcome {e} of basis {x_star}");
            }
            let mut doc = head;
            doc["all_pass"] = json!(false);
            doc["missing_outcomes"] = json!(outcomes);
            write_file(&report_path, &pretty(&with_manifest(doc, &manifest)))?;
            return Err(Failure::verification(format!("{} outcome(s) without an assignment", outcomes.len())).into());
        }
    };

    let dim_ok = rep.affine_dimension + 1 >= ks.dim;
    let dim_check = Check {
        name: "affine-dimension".into(),
        passed: dim_ok,
        detail: format!("{} (need ≥ {})", rep.affine_dimension, ks.dim - 1),
    };
    for c in &rep.report.checks {
        print_check(c);
    }
    let blocks_ok = rep.block_reports.iter().all(|r| r.all_pass());
    println!("{} blocks: {} bipartite behaviors", if blocks_ok { "PASS" } else { "FAIL" }, rep.block_reports.len());
    print_check(&dim_check);
    let all_pass = rep.report.all_pass() && blocks_ok && dim_ok;

    let behavior_path = output_path(cfg, a.out.as_deref(), &format!("{stem}_behavior.json"));
    let behavior: Value = serde_json::from_str(&behavior_to_json(&rep.attack.behavior))?;
    write_file(&behavior_path, &pretty(&with_manifest(behavior, &manifest)))?;

    let assignments: Vec<Vec<String>> = rep
        .attack
        .assignments
        .iter()
        .map(|f| (0..f.doubled.len()).map(|v| f.value(v).to_string()).collect())
        .collect();
    let mut doc = head;
    let extra = json!({
        "behavior_file": behavior_path.display().to_string(),
        "graph_edges": rep.graph_edges,
        "checks": rep.report.checks,
        "block_checks": rep.block_reports,
        "affine_dimension": rep.affine_dimension,
        "assignments": assignments,
        "all_pass": all_pass,
    });
    doc.as_object_mut().expect("object").extend(extra.as_object().expect("object").clone());
    write_file(&report_path, &pretty(&with_manifest(doc, &manifest)))?;
    println!("report: {}", report_path.display());

    if !all_pass {
        return Err(Failure::verification("attack verification failed").into());
    }
    Ok(())
}
