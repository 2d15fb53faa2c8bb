use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use findist::admissible::AdmissibleClass;
use findist::mesh::{load_deformation, load_mesh, make_box_grid, make_grid, Deformation, Mesh, Rect};
use findist::minimize::perturbed_identity;
use findist::{EnergyModel, MinimizeConfig};
use serde::{Deserialize, Serialize};

/// Input of the `minimize` command. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub mesh: MeshSource,
    pub model: EnergyModel,
    pub class: AdmissibleClass,
    #[serde(default)]
    pub minimize: MinimizeConfig,
    #[serde(default)]
    pub init: InitSource,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    File(PathBuf),
    Grid {
        nx: usize,
        ny: usize,
        #[serde(default = "unit_rect")]
        domain: Rect,
    },
    BoxGrid {
        nx: usize,
        ny: usize,
        nz: usize,
        #[serde(default)]
        lo: [f64; 3],
        #[serde(default = "unit_hi")]
        hi: [f64; 3],
    },
}

fn unit_rect() -> Rect {
    Rect::UNIT
}

fn unit_hi() -> [f64; 3] {
    [1.0; 3]
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSource {
    #[default]
    Identity,
    File(PathBuf),
    /// Identity plus a uniform interior perturbation seeded by the run seed.
    Perturbed { amplitude: f64 },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("invalid run config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let MeshSource::File(p) = &mut cfg.mesh {
            *p = base.join(&*p);
        }
        if let InitSource::File(p) = &mut cfg.init {
            *p = base.join(&*p);
        }
        if let Some(p) = &mut cfg.output_dir {
            *p = base.join(&*p);
        }
        Ok(cfg)
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        Ok(match &self.mesh {
            MeshSource::File(p) => load_mesh(p).with_context(|| format!("cannot load mesh {}", p.display()))?,
            MeshSource::Grid { nx, ny, domain } => {
                if *nx == 0 || *ny == 0 || !(domain.x1 > domain.x0 && domain.y1 > domain.y0) {
                    bail!("grid needs positive cell counts and a non-degenerate domain");
                }
                make_grid(*nx, *ny, *domain)
            }
            MeshSource::BoxGrid { nx, ny, nz, lo, hi } => {
                if *nx == 0 || *ny == 0 || *nz == 0 || (0..3).any(|i| !(hi[i] > lo[i])) {
                    bail!("box grid needs positive cell counts and a non-degenerate box");
                }
                make_box_grid(*nx, *ny, *nz, *lo, *hi)
            }
        })
    }

    pub fn build_init(&self, mesh: &Mesh) -> Result<Deformation> {
        Ok(match &self.init {
            InitSource::Identity => Deformation::identity(mesh),
            InitSource::File(p) => {
                load_deformation(p).with_context(|| format!("cannot load deformation {}", p.display()))?
            }
            InitSource::Perturbed { amplitude } => {
                if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    bail!("perturbation amplitude must be finite and non-negative, got {amplitude}");
                }
                perturbed_identity(mesh, *amplitude, self.seed)
            }
        })
    }
}
