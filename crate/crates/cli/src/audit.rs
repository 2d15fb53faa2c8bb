use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use findist::admissible::membership;
use findist::injectivity::{ciarlet_necas, InjectivityError, OverlapReport};
use findist::mesh::{load_deformation, load_mesh, Deformation};
use findist::{AdmissibleClass, EnergyModel, MembershipVerdict};
use serde::Serialize;

use crate::output::write_json;

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Mesh JSON file.
    #[arg(long)]
    pub mesh: PathBuf,
    /// Deformation JSON file; the identity when omitted.
    #[arg(long)]
    pub deformation: Option<PathBuf>,
    /// Energy model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Admissible class JSON file.
    #[arg(long)]
    pub class: PathBuf,
    /// Also run the Ciarlet–Nečas and overlap diagnostics.
    #[arg(long)]
    pub injectivity: bool,
    /// Raster cell size for the injectivity check.
    #[arg(long, requires = "injectivity")]
    pub resolution: Option<f64>,
    /// Also write the verdict to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
pub struct AuditOutput {
    pub verdict: MembershipVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub injectivity: Option<InjectivityOutput>,
}

#[derive(Serialize)]
pub struct InjectivityOutput {
    pub injective: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<OverlapReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {what} {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid {what} file {}", path.display()))
}

pub fn audit(a: &AuditArgs) -> Result<AuditOutput> {
    let mesh = load_mesh(&a.mesh).with_context(|| format!("cannot load mesh {}", a.mesh.display()))?;
    let phi = match &a.deformation {
        Some(p) => load_deformation(p).with_context(|| format!("cannot load deformation {}", p.display()))?,
        None => Deformation::identity(&mesh),
    };
    phi.check_against(&mesh)?;
    let model: EnergyModel = read_json(&a.model, "model")?;
    let class: AdmissibleClass = read_json(&a.class, "class")?;
    let mut verdict = membership(&mesh, &phi, &model, &class)?;
    let injectivity = if a.injectivity {
        let out = match ciarlet_necas(&mesh, &phi, a.resolution) {
            Ok(r) => InjectivityOutput { injective: r.passes && r.pairs.is_empty(), report: Some(r), error: None },
            Err(e @ InjectivityError::NegativeJacobian { .. }) => {
                InjectivityOutput { injective: false, report: None, error: Some(e.to_string()) }
            }
            Err(e) => return Err(e.into()),
        };
        verdict = verdict.with_injectivity(out.injective);
        Some(out)
    } else {
        None
    };
    Ok(AuditOutput { verdict, injectivity })
}

pub fn run(a: &AuditArgs) -> Result<bool> {
    let out = audit(a)?;
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(p) = &a.out {
        write_json(p, &out)?;
    }
    Ok(out.verdict.overall)
}
