//! Simplicial meshes, piecewise-affine deformations and their discrete
//! integrals.
//!
//! A deformation is given by one image point per mesh vertex; on every
//! simplex it is the unique affine interpolant, so its gradient is constant
//! per element and a single quadrature point per element integrates energy
//! and distortion norms exactly for the discrete map.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::EnergyModel;
use crate::numeric::pairwise_sum;
use crate::tensor::{distortion, SquareMatrix};

pub type Point = [f64; 3];

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("vertex {vertex} has {got} coordinates, expected {expected}")]
    VertexLength { vertex: usize, expected: usize, got: usize },
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFinite { vertex: usize },
    #[error("simplex {simplex} has {got} vertices, expected {expected}")]
    SimplexArity { simplex: usize, expected: usize, got: usize },
    #[error("simplex {simplex} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange { simplex: usize, index: usize, vertex_count: usize },
    #[error("simplex {simplex} has non-positive orientation (signed volume {volume:e})")]
    Inverted { simplex: usize, volume: f64 },
    #[error("face shared by {count} simplices (simplex {simplex}); mesh is not a manifold")]
    NonManifold { simplex: usize, count: usize },
    #[error("boundary_vertices disagree with face incidence: missing {missing:?}, unexpected {extra:?}")]
    BoundaryMismatch { missing: Vec<usize>, extra: Vec<usize> },
    #[error("mesh has no simplices")]
    Empty,
    #[error("simplex index {index} out of range ({count} simplices)")]
    NoSuchSimplex { index: usize, count: usize },
    #[error("deformation has {got} images but the mesh has {expected} vertices")]
    DeformationLength { expected: usize, got: usize },
    #[error("deformation dimension {got} does not match mesh dimension {expected}")]
    DeformationDim { expected: usize, got: usize },
    #[error("image {vertex} has {got} coordinates, expected {expected}")]
    ImageLength { vertex: usize, expected: usize, got: usize },
    #[error("image {vertex} has a non-finite coordinate")]
    NonFiniteImage { vertex: usize },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for MeshError {
    fn from(e: serde_json::Error) -> Self {
        MeshError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

/// Simplicial domain with positively oriented simplices.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    simplices: Vec<[usize; 4]>,
    boundary_vertices: Vec<usize>,
    ref_inverse: Vec<SquareMatrix>,
    volumes: Vec<f64>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.vertices == other.vertices
            && self.simplices == other.simplices
            && self.boundary_vertices == other.boundary_vertices
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    simplices: Vec<Vec<usize>>,
    boundary_vertices: Vec<usize>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

fn edge_matrix(dim: usize, pts: &[Point], idx: &[usize]) -> SquareMatrix {
    let p0 = pts[idx[0]];
    // column k holds vertex k+1 minus vertex 0
    SquareMatrix::from_fn(dim, |i, k| pts[idx[k + 1]][i] - p0[i])
}

fn boundary_from_faces(dim: usize, simplices: &[[usize; 4]]) -> Result<Vec<usize>, MeshError> {
    let mut faces: HashMap<[usize; 3], (usize, usize)> = HashMap::new();
    for (t, s) in simplices.iter().enumerate() {
        let s = &s[..dim + 1];
        for skip in 0..=dim {
            let mut face = [usize::MAX; 3];
            let mut k = 0;
            for (i, v) in s.iter().enumerate() {
                if i != skip {
                    face[k] = *v;
                    k += 1;
                }
            }
            face[..dim].sort_unstable();
            let e = faces.entry(face).or_insert((0, t));
            e.0 += 1;
        }
    }
    let mut boundary = Vec::new();
    for (face, (count, t)) in &faces {
        if *count > 2 {
            return Err(MeshError::NonManifold { simplex: *t, count: *count });
        }
        if *count == 1 {
            boundary.extend_from_slice(&face[..dim]);
        }
    }
    boundary.sort_unstable();
    boundary.dedup();
    Ok(boundary)
}

impl Mesh {
    /// Validates and builds a mesh; `boundary_vertices` must equal the set
    /// of vertices on faces incident to exactly one simplex.
    pub fn new(
        dim: usize,
        vertices: Vec<Point>,
        simplices: Vec<Vec<usize>>,
        boundary_vertices: Vec<usize>,
    ) -> Result<Self, MeshError> {
        let mut mesh = Self::with_computed_boundary(dim, vertices, simplices)?;
        let mut given = boundary_vertices;
        given.sort_unstable();
        given.dedup();
        if given != mesh.boundary_vertices {
            let missing = mesh.boundary_vertices.iter().filter(|v| given.binary_search(v).is_err()).copied().collect();
            let extra = given.iter().filter(|v| mesh.boundary_vertices.binary_search(v).is_err()).copied().collect();
            return Err(MeshError::BoundaryMismatch { missing, extra });
        }
        mesh.boundary_vertices = given;
        Ok(mesh)
    }

    /// Builds a mesh and derives its boundary from face incidence.
    pub fn with_computed_boundary(
        dim: usize,
        vertices: Vec<Point>,
        simplices: Vec<Vec<usize>>,
    ) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::BadDimension(dim));
        }
        if simplices.is_empty() {
            return Err(MeshError::Empty);
        }
        for (v, p) in vertices.iter().enumerate() {
            if p[..dim].iter().any(|x| !x.is_finite()) {
                return Err(MeshError::NonFinite { vertex: v });
            }
        }
        let mut fixed = Vec::with_capacity(simplices.len());
        for (t, s) in simplices.iter().enumerate() {
            if s.len() != dim + 1 {
                return Err(MeshError::SimplexArity { simplex: t, expected: dim + 1, got: s.len() });
            }
            let mut arr = [0usize; 4];
            for (k, &i) in s.iter().enumerate() {
                if i >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange { simplex: t, index: i, vertex_count: vertices.len() });
                }
                arr[k] = i;
            }
            fixed.push(arr);
        }
        let mut ref_inverse = Vec::with_capacity(fixed.len());
        let mut volumes = Vec::with_capacity(fixed.len());
        for (t, s) in fixed.iter().enumerate() {
            let dm = edge_matrix(dim, &vertices, &s[..dim + 1]);
            let volume = dm.det() / factorial(dim);
            if !(volume > 0.0) {
                return Err(MeshError::Inverted { simplex: t, volume });
            }
            ref_inverse.push(dm.inverse().ok_or(MeshError::Inverted { simplex: t, volume })?);
            volumes.push(volume);
        }
        let boundary_vertices = boundary_from_faces(dim, &fixed)?;
        Ok(Mesh { dim, vertices, simplices: fixed, boundary_vertices, ref_inverse, volumes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn simplex_count(&self) -> usize {
        self.simplices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn simplex(&self, t: usize) -> &[usize] {
        &self.simplices[t][..self.dim + 1]
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_vertices.binary_search(&v).is_ok()
    }

    pub fn volume(&self, t: usize) -> f64 {
        self.volumes[t]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Inverse of the reference edge matrix of simplex `t`.
    pub fn reference_inverse(&self, t: usize) -> &SquareMatrix {
        &self.ref_inverse[t]
    }

    pub fn total_volume(&self) -> f64 {
        pairwise_sum(&self.volumes)
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn diameter(&self) -> f64 {
        bbox_diameter(self.dim, &self.vertices)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let mut c = [0.0; 3];
        for &v in self.simplex(t) {
            for i in 0..self.dim {
                c[i] += self.vertices[v][i];
            }
        }
        for x in c.iter_mut().take(self.dim) {
            *x /= (self.dim + 1) as f64;
        }
        c
    }

    pub fn to_json_string(&self) -> String {
        let file = MeshFile {
            dim: self.dim,
            vertices: self.vertices.iter().map(|p| p[..self.dim].to_vec()).collect(),
            simplices: self.simplices.iter().map(|s| s[..self.dim + 1].to_vec()).collect(),
            boundary_vertices: self.boundary_vertices.clone(),
        };
        serde_json::to_string_pretty(&file).expect("mesh serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self, MeshError> {
        let file: MeshFile = serde_json::from_str(s)?;
        if file.dim != 2 && file.dim != 3 {
            return Err(MeshError::BadDimension(file.dim));
        }
        let mut vertices = Vec::with_capacity(file.vertices.len());
        for (v, row) in file.vertices.iter().enumerate() {
            if row.len() != file.dim {
                return Err(MeshError::VertexLength { vertex: v, expected: file.dim, got: row.len() });
            }
            let mut p = [0.0; 3];
            p[..file.dim].copy_from_slice(row);
            vertices.push(p);
        }
        Mesh::new(file.dim, vertices, file.simplices, file.boundary_vertices)
    }
}

pub(crate) fn bbox_diameter(dim: usize, pts: &[Point]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in pts {
        for i in 0..dim {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (0..dim).map(|i| (hi[i] - lo[i]).powi(2)).sum::<f64>().sqrt()
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    Mesh::from_json_str(&fs::read_to_string(path)?)
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    fs::write(path, mesh.to_json_string())?;
    Ok(())
}

/// Image positions of the mesh vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Deformation {
    dim: usize,
    images: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeformationFile {
    images: Vec<Vec<f64>>,
}

impl Deformation {
    pub fn new(dim: usize, images: Vec<Point>) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::BadDimension(dim));
        }
        for (v, p) in images.iter().enumerate() {
            if p[..dim].iter().any(|x| !x.is_finite()) {
                return Err(MeshError::NonFiniteImage { vertex: v });
            }
        }
        Ok(Deformation { dim, images })
    }

    pub fn identity(mesh: &Mesh) -> Self {
        Deformation { dim: mesh.dim, images: mesh.vertices.clone() }
    }

    /// Samples a map at the mesh vertices.
    pub fn from_map(mesh: &Mesh, mut f: impl FnMut(&Point) -> Point) -> Self {
        Deformation { dim: mesh.dim, images: mesh.vertices.iter().map(&mut f).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[Point] {
        &self.images
    }

    pub fn images_mut(&mut self) -> &mut [Point] {
        &mut self.images
    }

    pub fn image(&self, v: usize) -> &Point {
        &self.images[v]
    }

    /// Checks that this deformation can be paired with `mesh`.
    pub fn check_against(&self, mesh: &Mesh) -> Result<(), MeshError> {
        if self.dim != mesh.dim {
            return Err(MeshError::DeformationDim { expected: mesh.dim, got: self.dim });
        }
        if self.images.len() != mesh.vertices.len() {
            return Err(MeshError::DeformationLength { expected: mesh.vertices.len(), got: self.images.len() });
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let file = DeformationFile { images: self.images.iter().map(|p| p[..self.dim].to_vec()).collect() };
        serde_json::to_string_pretty(&file).expect("deformation serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self, MeshError> {
        let file: DeformationFile = serde_json::from_str(s)?;
        let dim = file.images.first().map(|r| r.len()).unwrap_or(2);
        if dim != 2 && dim != 3 {
            return Err(MeshError::BadDimension(dim));
        }
        let mut images = Vec::with_capacity(file.images.len());
        for (v, row) in file.images.iter().enumerate() {
            if row.len() != dim {
                return Err(MeshError::ImageLength { vertex: v, expected: dim, got: row.len() });
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(row);
            images.push(p);
        }
        Deformation::new(dim, images)
    }
}

pub fn load_deformation(path: impl AsRef<Path>) -> Result<Deformation, MeshError> {
    Deformation::from_json_str(&fs::read_to_string(path)?)
}

pub fn save_deformation(phi: &Deformation, path: impl AsRef<Path>) -> Result<(), MeshError> {
    fs::write(path, phi.to_json_string())?;
    Ok(())
}

/// Constant gradient of `phi` on simplex `t`.
pub fn element_gradient(mesh: &Mesh, phi: &Deformation, t: usize) -> Result<SquareMatrix, MeshError> {
    phi.check_against(mesh)?;
    if t >= mesh.simplex_count() {
        return Err(MeshError::NoSuchSimplex { index: t, count: mesh.simplex_count() });
    }
    Ok(gradient_of(mesh, &phi.images, t))
}

pub(crate) fn gradient_of(mesh: &Mesh, images: &[Point], t: usize) -> SquareMatrix {
    let ds = edge_matrix(mesh.dim, images, mesh.simplex(t));
    ds * mesh.ref_inverse[t]
}

/// Gradients of every element, in simplex order.
pub fn element_gradients(mesh: &Mesh, phi: &Deformation) -> Vec<SquareMatrix> {
    (0..mesh.simplex_count())
        .into_par_iter()
        .map(|t| gradient_of(mesh, &phi.images, t))
        .collect()
}

/// Per-element Jacobians `det F_T`.
pub fn element_jacobians(mesh: &Mesh, phi: &Deformation) -> Vec<f64> {
    element_gradients(mesh, phi).iter().map(|f| f.det()).collect()
}

/// `vol(T)·W(F_T)` for every element.
pub fn element_energies(mesh: &Mesh, phi: &Deformation, model: &EnergyModel) -> Vec<f64> {
    (0..mesh.simplex_count())
        .into_par_iter()
        .map(|t| mesh.volumes[t] * model.eval_w(&gradient_of(mesh, &phi.images, t)))
        .collect()
}

/// `Σ_T vol(T)·W(F_T)`; `+∞` as soon as one element is infinite.
pub fn discrete_energy(mesh: &Mesh, phi: &Deformation, model: &EnergyModel) -> f64 {
    let e = element_energies(mesh, phi, model);
    if e.iter().any(|v| v.is_infinite() && *v > 0.0) {
        return f64::INFINITY;
    }
    pairwise_sum(&e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistortionKind {
    Outer,
    Inner,
}

/// Pointwise distortion of every element; `+∞` for orientation-reversing
/// elements, where the coefficients are undefined.
pub fn element_distortions(mesh: &Mesh, phi: &Deformation, which: DistortionKind) -> Vec<f64> {
    element_gradients(mesh, phi)
        .iter()
        .map(|f| {
            let d = distortion(f);
            match which {
                DistortionKind::Outer => d.outer,
                DistortionKind::Inner => d.inner,
            }
            .unwrap_or(f64::INFINITY)
        })
        .collect()
}

/// `L_s` norm of an elementwise-constant function.
pub fn lebesgue_norm(volumes: &[f64], values: &[f64], exponent: f64) -> f64 {
    assert!(exponent >= 1.0, "exponent must be at least 1");
    if values.iter().any(|v| v.is_infinite()) {
        return f64::INFINITY;
    }
    if exponent.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let terms: Vec<f64> = volumes.iter().zip(values).map(|(w, k)| w * k.powf(exponent)).collect();
    pairwise_sum(&terms).powf(1.0 / exponent)
}

/// `‖K(·, φ)‖_{L_s(Ω)}` for the outer or inner distortion.
pub fn distortion_norm(mesh: &Mesh, phi: &Deformation, which: DistortionKind, exponent: f64) -> f64 {
    lebesgue_norm(&mesh.volumes, &element_distortions(mesh, phi, which), exponent)
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 };

    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }
}

/// Structured triangulation with `2·nx·ny` triangles; the cell diagonals
/// alternate in a checkerboard pattern.
pub fn make_grid(nx: usize, ny: usize, domain: Rect) -> Mesh {
    assert!(nx >= 1 && ny >= 1, "grid needs at least one cell per direction");
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = domain.x0 + (domain.x1 - domain.x0) * i as f64 / nx as f64;
            let y = domain.y0 + (domain.y1 - domain.y0) * j as f64 / ny as f64;
            vertices.push([x, y, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut simplices = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            if (i + j) % 2 == 0 {
                simplices.push(vec![v00, v10, v11]);
                simplices.push(vec![v00, v11, v01]);
            } else {
                simplices.push(vec![v00, v10, v01]);
                simplices.push(vec![v10, v11, v01]);
            }
        }
    }
    Mesh::with_computed_boundary(2, vertices, simplices).expect("structured grid is valid")
}

/// Structured tetrahedral grid of a box, six tetrahedra per cell.
pub fn make_box_grid(nx: usize, ny: usize, nz: usize, lo: [f64; 3], hi: [f64; 3]) -> Mesh {
    assert!(nx >= 1 && ny >= 1 && nz >= 1, "grid needs at least one cell per direction");
    let n = [nx, ny, nz];
    let mut vertices = Vec::new();
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let idx = [i, j, k];
                let mut p = [0.0; 3];
                for a in 0..3 {
                    p[a] = lo[a] + (hi[a] - lo[a]) * idx[a] as f64 / n[a] as f64;
                }
                vertices.push(p);
            }
        }
    }
    let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut simplices = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut tet = vec![id(c[0], c[1], c[2])];
                    for axis in perm {
                        c[axis] += 1;
                        tet.push(id(c[0], c[1], c[2]));
                    }
                    let vol = edge_matrix(3, &vertices, &tet).det();
                    if vol < 0.0 {
                        tet.swap(1, 2);
                    }
                    simplices.push(tet);
                }
            }
        }
    }
    Mesh::with_computed_boundary(3, vertices, simplices).expect("structured box grid is valid")
}
