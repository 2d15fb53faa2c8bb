use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use findist::injectivity::repaired_fold;
use findist::mesh::{make_box_grid, make_grid, save_deformation, save_mesh, Deformation, Rect};
use findist::minimize::perturbed_identity;
use findist::sequences::{planar_mesh_deformation, Index};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// Structured triangle or tetrahedron grid.
    Grid,
    /// Two overlapping copies of a square grid glued along one edge.
    Fold,
    /// Interpolant of the planar shear map on `[-1, 1]²`.
    Shear,
}

#[derive(Debug, Args)]
pub struct MeshGenArgs {
    #[arg(long, value_enum, default_value_t = Fixture::Grid)]
    pub fixture: Fixture,
    /// 2 or 3 (grid only).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Cells per direction, comma separated (one value is repeated).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub cells: Vec<usize>,
    /// Lower corner, comma separated; the origin by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lo: Vec<f64>,
    /// Upper corner, comma separated; all ones by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hi: Vec<f64>,
    /// Shear index for `--fixture shear` (`inf` for the limit map).
    #[arg(long, default_value = "1")]
    pub k: Index,
    /// Interior perturbation of the identity written with `--deformation`.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mesh output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Deformation output file.
    #[arg(long)]
    pub deformation: Option<PathBuf>,
}

fn corner(v: &[f64], dim: usize, fill: f64) -> Result<[f64; 3]> {
    let mut c = [fill; 3];
    match v.len() {
        0 => {}
        n if n == dim => c[..dim].copy_from_slice(v),
        n => bail!("corner needs {dim} coordinates, got {n}"),
    }
    Ok(c)
}

pub fn run(a: &MeshGenArgs) -> Result<bool> {
    let cell = |i: usize| a.cells.get(i).or(a.cells.last()).copied().unwrap_or(0);
    let (mesh, phi) = match a.fixture {
        Fixture::Grid => {
            if a.dim != 2 && a.dim != 3 {
                bail!("--dim must be 2 or 3, got {}", a.dim);
            }
            let lo = corner(&a.lo, a.dim, 0.0)?;
            let hi = corner(&a.hi, a.dim, 1.0)?;
            if (0..a.dim).any(|i| !(hi[i] > lo[i]) || cell(i) == 0) {
                bail!("grid needs positive cell counts and hi > lo in every direction");
            }
            let mesh = if a.dim == 2 {
                make_grid(cell(0), cell(1), Rect::new(lo[0], lo[1], hi[0], hi[1]))
            } else {
                make_box_grid(cell(0), cell(1), cell(2), lo, hi)
            };
            if !(a.perturb >= 0.0 && a.perturb.is_finite()) {
                bail!("--perturb must be finite and non-negative");
            }
            let phi = perturbed_identity(&mesh, a.perturb, a.seed);
            (mesh, phi)
        }
        Fixture::Fold => {
            if cell(0) == 0 {
                bail!("fold needs a positive cell count");
            }
            repaired_fold(cell(0))
        }
        Fixture::Shear => planar_mesh_deformation(a.k, cell(0))?,
    };
    save_mesh(&mesh, &a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    if let Some(p) = &a.deformation {
        save_deformation(&phi, p).with_context(|| format!("cannot write {}", p.display()))?;
    } else if phi != Deformation::identity(&mesh) {
        eprintln!("note: fixture deformation not written (pass --deformation)");
    }
    println!("{} vertices, {} simplices, dim {}", mesh.vertex_count(), mesh.simplex_count(), mesh.dim());
    Ok(true)
}
