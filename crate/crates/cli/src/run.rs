use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::Args;
use findist::admissible::membership;
use findist::minimize::{minimize, Termination};
use findist::mesh::save_deformation;
use findist::MinimizeReport;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{ensure_dir, num, write_csv, write_json, write_manifest};

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub const REPORT_HEADER: [&str; 10] =
    ["iter", "energy", "objective", "grad_norm", "step", "kI_norm", "kO_norm", "min_J", "cn_gap", "mu"];

/// Input failures surface as `Err`; a finished run returns whether it ended
/// at a stationary point inside the class.
pub fn run(a: &MinimizeArgs, cli_threads: Option<usize>) -> Result<bool> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.minimize.seed = cfg.seed;
    if let Some(t) = cli_threads {
        cfg.threads = Some(t);
    }
    crate::init_threads(cfg.threads)?;
    let out_dir = a
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| anyhow!("no output directory: pass --out or set output_dir"))?;
    cfg.output_dir = Some(out_dir.clone());

    let mesh = cfg.build_mesh()?;
    let init = cfg.build_init(&mesh)?;
    init.check_against(&mesh)?;
    if cfg.minimize.det_floor.is_none() {
        cfg.minimize.det_floor = Some(cfg.minimize.det_floor_for(&mesh));
    }
    let (phi, report) =
        minimize(&mesh, &cfg.model, &cfg.class, &init, &cfg.minimize).context("cannot run the minimization")?;
    let verdict = membership(&mesh, &phi, &cfg.model, &cfg.class)?;

    ensure_dir(&out_dir)?;
    write_csv(Some(&out_dir.join("report.csv")), &REPORT_HEADER, &report_rows(&report))?;
    save_deformation(&phi, out_dir.join("deformation.json")).context("cannot write deformation")?;
    write_json(&out_dir.join("verdict.json"), &verdict)?;
    write_manifest(&out_dir, "minimize", &cfg)?;

    let summary = Summary {
        termination: report.termination,
        accepted_steps: report.accepted_steps(),
        objective: report.last().objective,
        grad_norm: report.last().grad_norm,
        audit_passed: verdict.overall,
        failed: verdict.failed.clone(),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    let finished = matches!(
        report.termination,
        Termination::Stationary | Termination::Converged | Termination::StepCollapse
    );
    Ok(finished && verdict.overall)
}

#[derive(Serialize)]
struct Summary {
    termination: Termination,
    accepted_steps: usize,
    objective: f64,
    grad_norm: f64,
    audit_passed: bool,
    failed: Vec<String>,
}

pub fn report_rows(report: &MinimizeReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.iter.to_string(),
                num(r.energy),
                num(r.objective),
                num(r.grad_norm),
                num(r.step),
                num(r.k_inner_norm),
                num(r.k_outer_norm),
                num(r.min_jacobian),
                num(r.cn_gap),
                num(r.mu),
            ]
        })
        .collect()
}
