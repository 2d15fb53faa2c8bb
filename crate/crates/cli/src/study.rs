use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use findist::mesh::DistortionKind;
use findist::sequences::{norm_study, render_grid, weak_minor_demo, FamilyKind, Index, SequenceFamily, TestFunction};
use serde::Serialize;

use crate::output::{ensure_dir, num, write_csv, write_manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Planar,
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Outer,
    Inner,
}

const DEFAULT_KS: &str = "1,2,4,8,16,32,64,128,256,512,1024";

#[derive(Debug, Args, Serialize)]
pub struct SequenceArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Dimension of the ball family (2 or 3).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Sequence indices, comma separated.
    #[arg(long = "k", value_delimiter = ',', default_value = DEFAULT_KS)]
    pub ks: Vec<u64>,
    /// Norm exponents, comma separated.
    #[arg(long = "s", value_delimiter = ',', default_value = "1,2")]
    pub exponents: Vec<f64>,
    /// Panels per octave / per radial unit; every norm is also computed at twice this.
    #[arg(long, default_value_t = 4)]
    pub resolution: usize,
    #[arg(long, value_enum, default_value_t = Which::Outer)]
    pub which: Which,
    /// Emit the images of grid lines instead of norms (planar family only).
    #[arg(long)]
    pub render: bool,
    /// Grid lines per direction for `--render`.
    #[arg(long, default_value_t = 16)]
    pub lines: usize,
    /// Samples per grid line for `--render`.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Output directory; CSV goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct WeakMinorArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long = "k", value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256,512,1024,2048,4096,8192,16384")]
    pub ks: Vec<u64>,
    /// Midpoint cells per axis; a multiple of 4.
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    /// Centre of the bump test function, comma separated; the origin by default.
    #[arg(long, value_delimiter = ',')]
    pub center: Vec<f64>,
    /// Radius of the bump; 0.9 for the planar family and 0.5 for the ball.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn kind(family: Family, dim: usize) -> Result<FamilyKind> {
    Ok(match family {
        Family::Planar => {
            if dim != 2 {
                bail!("the planar family lives in dimension 2, got --dim {dim}");
            }
            FamilyKind::PlanarShear
        }
        Family::Ball => {
            if dim != 2 && dim != 3 {
                bail!("the ball family is available in dimension 2 or 3, got --dim {dim}");
            }
            FamilyKind::PuncturedBall { dim }
        }
    })
}

fn target(out: Option<&Path>, file: &str) -> Result<Option<PathBuf>> {
    match out {
        Some(dir) => {
            ensure_dir(dir)?;
            Ok(Some(dir.join(file)))
        }
        None => Ok(None),
    }
}

pub fn run_sequence(a: &SequenceArgs) -> Result<bool> {
    let kind = kind(a.family, a.dim)?;
    if a.ks.is_empty() || a.ks.contains(&0) {
        bail!("k values must be integers ≥ 1");
    }
    if a.render {
        if a.family != Family::Planar {
            bail!("--render is available for the planar family only");
        }
        let mut rows = Vec::new();
        for &k in &a.ks {
            let fam = SequenceFamily::planar_shear(Index::Finite(k));
            for p in render_grid(&fam, a.lines, a.samples)? {
                rows.push(vec![
                    k.to_string(),
                    p.line.to_string(),
                    p.direction.to_string(),
                    num(p.x1),
                    num(p.x2),
                    num(p.y1),
                    num(p.y2),
                ]);
            }
        }
        let path = target(a.out.as_deref(), "render.csv")?;
        write_csv(path.as_deref(), &["k", "line", "direction", "x1", "x2", "y1", "y2"], &rows)?;
    } else {
        if a.exponents.iter().any(|s| !(*s >= 1.0 && s.is_finite())) {
            bail!("norm exponents must be finite and at least 1");
        }
        let which = match a.which {
            Which::Outer => DistortionKind::Outer,
            Which::Inner => DistortionKind::Inner,
        };
        let table = norm_study(kind, &a.ks, &a.exponents, a.resolution, which)?;
        let rows: Vec<Vec<String>> = table
            .iter()
            .map(|r| {
                vec![
                    r.family.clone(),
                    r.k.clone(),
                    num(r.s),
                    num(r.norm),
                    r.resolution.to_string(),
                    num(r.richardson_ratio),
                ]
            })
            .collect();
        let path = target(a.out.as_deref(), "norms.csv")?;
        write_csv(path.as_deref(), &["family", "k", "s", "norm", "resolution", "richardson_ratio"], &rows)?;
    }
    if let Some(dir) = &a.out {
        write_manifest(dir, "sequence", a)?;
    }
    Ok(true)
}

pub fn run_weak_minors(a: &WeakMinorArgs) -> Result<bool> {
    let kind = kind(a.family, a.dim)?;
    let center = if a.center.is_empty() { vec![0.0; a.dim] } else { a.center.clone() };
    if center.len() != a.dim {
        bail!("--center needs {} coordinates, got {}", a.dim, center.len());
    }
    let radius = a.radius.unwrap_or(if a.family == Family::Planar { 0.9 } else { 0.5 });
    if !(radius > 0.0 && radius.is_finite()) {
        bail!("bump radius must be positive, got {radius}");
    }
    let theta = TestFunction::Bump { center, radius };
    let report = weak_minor_demo(kind, &theta, &a.ks, a.resolution)?;
    let mut rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![r.family.clone(), r.k.clone(), num(r.integral), r.difference.map(num).unwrap_or_default()])
        .collect();
    let family = report.rows.first().map(|r| r.family.clone()).unwrap_or_default();
    let last = report.rows.last().map(|r| r.integral).unwrap_or(report.limit);
    rows.push(vec![family, "inf".into(), num(report.limit), num((last - report.limit).abs())]);
    let path = target(a.out.as_deref(), "weak_minors.csv")?;
    write_csv(path.as_deref(), &["family", "k", "integral", "difference"], &rows)?;
    eprintln!(
        "differences decreasing: {}, final relative change: {:.3e}, final relative error: {:.3e}, converged: {}",
        report.differences_decreasing, report.final_relative_change, report.final_relative_error, report.converged
    );
    if let Some(dir) = &a.out {
        write_manifest(dir, "weak-minors", &serde_json::json!({ "args": a, "theta": theta }))?;
    }
    Ok(report.converged)
}
