//! Injectivity diagnostics for piecewise-affine maps: the Ciarlet–Nečas
//! inequality `∫J ≤ |φ(Ω)|`, exact pairwise overlap of image triangles and
//! strict Jacobian positivity.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::mesh::{element_gradients, make_grid, Deformation, Mesh, MeshError, Point, Rect};
use crate::numeric::pairwise_sum;

#[derive(Debug, Error)]
pub enum InjectivityError {
    #[error("simplex {simplex} has negative Jacobian {jacobian:e}; the Ciarlet–Nečas test needs J ≥ 0")]
    NegativeJacobian { simplex: usize, jacobian: f64 },
    #[error("resolution must be positive and finite, got {0}")]
    Resolution(f64),
    #[error("rasterization would need {0} cells per axis; pick a coarser resolution")]
    TooFine(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapPair {
    pub first: usize,
    pub second: usize,
    pub area: f64,
}

/// Both sides of the Ciarlet–Nečas inequality with the raster error bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapReport {
    pub dim: usize,
    /// Positive-area overlaps of image triangles (2D only, empty in 3D).
    pub pairs: Vec<OverlapPair>,
    pub total_overlap: f64,
    /// Rasterized `|φ(Ω)|`.
    pub union_volume: f64,
    /// `Σ_T vol(T)·J_T`, exact up to rounding.
    pub sum_image_volume: f64,
    pub resolution: f64,
    /// Bound on `|union_volume − |φ(Ω)||`.
    pub raster_error_bound: f64,
    /// `sum_image_volume / union_volume`.
    pub ratio: f64,
    /// `lhs ≤ rhs + bound`.
    pub passes: bool,
}

/// Default raster cell size: `diam/2048` in 2D, `diam/128` in 3D.
pub fn default_resolution(mesh: &Mesh) -> f64 {
    let d = mesh.diameter();
    if mesh.dim() == 2 {
        d / 2048.0
    } else {
        d / 128.0
    }
}

/// Ciarlet–Nečas check at raster cell size `resolution` (default when `None`).
pub fn ciarlet_necas(
    mesh: &Mesh,
    phi: &Deformation,
    resolution: Option<f64>,
) -> Result<OverlapReport, InjectivityError> {
    phi.check_against(mesh)?;
    let h = resolution.unwrap_or_else(|| default_resolution(mesh));
    if !(h > 0.0 && h.is_finite()) {
        return Err(InjectivityError::Resolution(h));
    }
    let jac: Vec<f64> = element_gradients(mesh, phi).iter().map(|f| f.det()).collect();
    if let Some((t, &j)) = jac.iter().enumerate().find(|(_, j)| **j < 0.0) {
        return Err(InjectivityError::NegativeJacobian { simplex: t, jacobian: j });
    }
    let terms: Vec<f64> = mesh.volumes().iter().zip(&jac).map(|(v, j)| v * j).collect();
    let lhs = pairwise_sum(&terms);
    let union_volume = raster_union(mesh, phi, &jac, h)?;
    let bound = raster_bound(mesh, phi, &jac, h);
    let pairs = if mesh.dim() == 2 { overlap_pairs(mesh, phi) } else { Vec::new() };
    let total_overlap = pairwise_sum(&pairs.iter().map(|p| p.area).collect::<Vec<_>>());
    Ok(OverlapReport {
        dim: mesh.dim(),
        pairs,
        total_overlap,
        union_volume,
        sum_image_volume: lhs,
        resolution: h,
        raster_error_bound: bound,
        ratio: lhs / union_volume,
        passes: lhs <= union_volume + bound,
    })
}

/// Per-simplex data for rasterization: vertex 0 and the inverse edge matrix.
struct ImageSimplex {
    origin: Point,
    inv: [[f64; 3]; 3],
    lo: Point,
    hi: Point,
}

fn image_simplices(mesh: &Mesh, phi: &Deformation, jac: &[f64]) -> Vec<ImageSimplex> {
    let n = mesh.dim();
    (0..mesh.simplex_count())
        .filter(|&t| jac[t] > 0.0)
        .filter_map(|t| {
            let idx = mesh.simplex(t);
            let y0 = *phi.image(idx[0]);
            let e = crate::tensor::SquareMatrix::from_fn(n, |i, k| phi.image(idx[k + 1])[i] - y0[i]);
            let inv = e.inverse()?;
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for &v in idx {
                for a in 0..n {
                    lo[a] = lo[a].min(phi.image(v)[a]);
                    hi[a] = hi[a].max(phi.image(v)[a]);
                }
            }
            let mut m = [[0.0; 3]; 3];
            for (i, row) in m.iter_mut().enumerate().take(n) {
                for (k, x) in row.iter_mut().enumerate().take(n) {
                    *x = inv.get(i, k);
                }
            }
            Some(ImageSimplex { origin: y0, inv: m, lo, hi })
        })
        .collect()
}

/// Counts raster cell centres covered by the union of image simplices.
///
/// The grid is swept line by line along the first axis; on each line every
/// simplex covers an interval, so the count is an exact union of integer
/// index ranges and does not depend on the thread schedule.
fn raster_union(mesh: &Mesh, phi: &Deformation, jac: &[f64], h: f64) -> Result<f64, InjectivityError> {
    let n = mesh.dim();
    let simplices = image_simplices(mesh, phi, jac);
    if simplices.is_empty() {
        return Ok(0.0);
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for s in &simplices {
        for a in 0..n {
            lo[a] = lo[a].min(s.lo[a]);
            hi[a] = hi[a].max(s.hi[a]);
        }
    }
    let mut cells = [1usize; 3];
    for a in 0..n {
        let c = ((hi[a] - lo[a]) / h).ceil() + 1.0;
        if c > 1e7 {
            return Err(InjectivityError::TooFine(c as usize));
        }
        cells[a] = c as usize;
    }
    let (ny, nz) = (cells[1], if n == 3 { cells[2] } else { 1 });
    if ny * nz > 50_000_000 {
        return Err(InjectivityError::TooFine(ny.max(nz)));
    }
    // index range of centres lo + (i + ½)h inside [a, b]
    let centre_range = |axis: usize, a: f64, b: f64| -> (i64, i64) {
        let i0 = ((a - lo[axis]) / h - 0.5).ceil() as i64;
        let i1 = ((b - lo[axis]) / h - 0.5).floor() as i64;
        (i0, i1)
    };
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); ny * nz];
    for (s_idx, s) in simplices.iter().enumerate() {
        let (j0, j1) = centre_range(1, s.lo[1], s.hi[1]);
        let (k0, k1) = if n == 3 { centre_range(2, s.lo[2], s.hi[2]) } else { (0, 0) };
        for k in k0.max(0)..=k1.min(nz as i64 - 1) {
            for j in j0.max(0)..=j1.min(ny as i64 - 1) {
                buckets[k as usize * ny + j as usize].push(s_idx as u32);
            }
        }
    }
    let counts: Vec<u64> = buckets
        .par_iter()
        .enumerate()
        .map(|(line, members)| {
            if members.is_empty() {
                return 0;
            }
            let (j, k) = (line % ny, line / ny);
            let mut p = [0.0; 3];
            p[1] = lo[1] + (j as f64 + 0.5) * h;
            if n == 3 {
                p[2] = lo[2] + (k as f64 + 0.5) * h;
            }
            let mut ranges: Vec<(i64, i64)> = members
                .iter()
                .filter_map(|&m| line_interval(&simplices[m as usize], n, &p))
                .map(|(a, b)| centre_range(0, a, b))
                .filter(|(a, b)| a <= b)
                .collect();
            ranges.sort_unstable();
            let mut total = 0u64;
            let mut cur: Option<(i64, i64)> = None;
            for (a, b) in ranges {
                match cur {
                    Some((ca, cb)) if a <= cb + 1 => cur = Some((ca, cb.max(b))),
                    Some((ca, cb)) => {
                        total += (cb - ca + 1) as u64;
                        cur = Some((a, b));
                    }
                    None => cur = Some((a, b)),
                }
            }
            if let Some((ca, cb)) = cur {
                total += (cb - ca + 1) as u64;
            }
            total
        })
        .collect();
    let total: u64 = counts.iter().sum();
    Ok(total as f64 * h.powi(n as i32))
}

/// Parameter interval `[a, b]` of `x` for which `(x, p₁, p₂)` lies in the
/// simplex (barycentric coordinates all non-negative).
fn line_interval(s: &ImageSimplex, n: usize, p: &Point) -> Option<(f64, f64)> {
    let mut a = f64::NEG_INFINITY;
    let mut b = f64::INFINITY;
    // μ(x) = inv·(p − y0) + x·inv·e₁, with p₀ = 0
    let mut base = [0.0; 3];
    let mut slope = [0.0; 3];
    for i in 0..n {
        for k in 0..n {
            base[i] += s.inv[i][k] * (p[k] - s.origin[k]);
        }
        slope[i] = s.inv[i][0];
    }
    let mut clip = |c0: f64, c1: f64| {
        // c0 + x·c1 ≥ 0
        if c1 > 0.0 {
            a = a.max(-c0 / c1);
        } else if c1 < 0.0 {
            b = b.min(-c0 / c1);
        } else if c0 < 0.0 {
            a = f64::INFINITY;
        }
    };
    let (mut sum0, mut sum1) = (1.0, 0.0);
    for i in 0..n {
        clip(base[i], slope[i]);
        sum0 -= base[i];
        sum1 -= slope[i];
    }
    clip(sum0, sum1);
    (a <= b).then_some((a, b))
}

/// Facets of the mesh that can carry the boundary of the image union: faces
/// with one incident simplex, or touching a simplex with `J ≤ 0`.
fn exposed_facets(mesh: &Mesh, jac: &[f64]) -> Vec<[usize; 3]> {
    let n = mesh.dim();
    let mut faces: HashMap<[usize; 3], (usize, bool)> = HashMap::new();
    for t in 0..mesh.simplex_count() {
        let s = mesh.simplex(t);
        for skip in 0..=n {
            let mut face = [usize::MAX; 3];
            let mut k = 0;
            for (i, v) in s.iter().enumerate() {
                if i != skip {
                    face[k] = *v;
                    k += 1;
                }
            }
            face[..n].sort_unstable();
            let e = faces.entry(face).or_insert((0, false));
            e.0 += 1;
            e.1 |= jac[t] <= 0.0;
        }
    }
    let mut out: Vec<[usize; 3]> =
        faces.into_iter().filter(|(_, (c, degenerate))| *c == 1 || *degenerate).map(|(f, _)| f).collect();
    out.sort_unstable();
    out
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Volume of the tube of radius `h·√n` around the images of the exposed
/// facets. Every misclassified raster cell lies inside that tube.
fn raster_bound(mesh: &Mesh, phi: &Deformation, jac: &[f64], h: f64) -> f64 {
    let n = mesh.dim();
    let terms: Vec<f64> = exposed_facets(mesh, jac)
        .iter()
        .map(|f| {
            let p: Vec<&Point> = f[..n].iter().map(|&v| phi.image(v)).collect();
            if n == 2 {
                let rho = 2f64.sqrt() * h;
                2.0 * rho * dist(p[0], p[1]) + PI * rho * rho
            } else {
                let rho = 3f64.sqrt() * h;
                let perimeter = dist(p[0], p[1]) + dist(p[1], p[2]) + dist(p[2], p[0]);
                let u = [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]];
                let w = [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]];
                let cross = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
                let area = 0.5 * (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
                2.0 * rho * area + 0.5 * PI * rho * rho * perimeter + 4.0 / 3.0 * PI * rho.powi(3)
            }
        })
        .collect();
    pairwise_sum(&terms)
}

type P2 = [f64; 2];

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn polygon_area(poly: &[P2]) -> f64 {
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

fn ccw(mut t: [P2; 3]) -> [P2; 3] {
    if cross(t[0], t[1], t[2]) < 0.0 {
        t.swap(1, 2);
    }
    t
}

/// Area of the intersection of two triangles (Sutherland–Hodgman).
///
/// The clipped and clipping triangle are picked by a fixed order on the
/// coordinates, so swapping the arguments gives bit-identical results.
pub fn triangle_overlap(a: [P2; 3], b: [P2; 3]) -> f64 {
    let key = |t: &[P2; 3]| t.iter().flatten().map(|v| v.to_bits() as i64).collect::<Vec<_>>();
    let (a, b) = if key(&a) <= key(&b) { (a, b) } else { (b, a) };
    let a = ccw(a);
    let b = ccw(b);
    let mut poly: Vec<P2> = a.to_vec();
    for i in 0..3 {
        if poly.is_empty() {
            return 0.0;
        }
        let (e0, e1) = (b[i], b[(i + 1) % 3]);
        let input = std::mem::take(&mut poly);
        for k in 0..input.len() {
            let cur = input[k];
            let prev = input[(k + input.len() - 1) % input.len()];
            let dc = cross(e0, e1, cur);
            let dp = cross(e0, e1, prev);
            if dc >= 0.0 {
                if dp < 0.0 {
                    poly.push(intersect(prev, cur, dp, dc));
                }
                poly.push(cur);
            } else if dp >= 0.0 {
                poly.push(intersect(prev, cur, dp, dc));
            }
        }
    }
    if poly.len() < 3 {
        return 0.0;
    }
    polygon_area(&poly).max(0.0)
}

fn intersect(p: P2, q: P2, dp: f64, dq: f64) -> P2 {
    let t = dp / (dp - dq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

fn image_triangle(mesh: &Mesh, phi: &Deformation, t: usize) -> [P2; 3] {
    let s = mesh.simplex(t);
    let p = |v: usize| [phi.image(v)[0], phi.image(v)[1]];
    [p(s[0]), p(s[1]), p(s[2])]
}

/// Pairs of image triangles whose interiors overlap, with exact areas, in
/// lexicographic index order. Contacts along edges or at vertices are not
/// reported. Panics unless `mesh.dim() == 2`.
pub fn overlap_pairs(mesh: &Mesh, phi: &Deformation) -> Vec<OverlapPair> {
    assert_eq!(mesh.dim(), 2, "overlap_pairs is defined for planar meshes");
    let tris: Vec<[P2; 3]> = (0..mesh.simplex_count()).map(|t| image_triangle(mesh, phi, t)).collect();
    let areas: Vec<f64> = tris.iter().map(|t| cross(t[0], t[1], t[2]).abs() * 0.5).collect();
    let boxes: Vec<[f64; 4]> = tris
        .iter()
        .map(|t| {
            let xs = t.iter().map(|p| p[0]);
            let ys = t.iter().map(|p| p[1]);
            [
                xs.clone().fold(f64::INFINITY, f64::min),
                xs.fold(f64::NEG_INFINITY, f64::max),
                ys.clone().fold(f64::INFINITY, f64::min),
                ys.fold(f64::NEG_INFINITY, f64::max),
            ]
        })
        .collect();
    let mut order: Vec<usize> = (0..tris.len()).collect();
    order.sort_by(|&i, &j| boxes[i][0].total_cmp(&boxes[j][0]).then(i.cmp(&j)));
    let mut pairs: Vec<OverlapPair> = (0..order.len())
        .into_par_iter()
        .flat_map_iter(|r| {
            let i = order[r];
            let mut found = Vec::new();
            for &j in &order[r + 1..] {
                if boxes[j][0] >= boxes[i][1] {
                    break;
                }
                if boxes[j][2] >= boxes[i][3] || boxes[i][2] >= boxes[j][3] {
                    continue;
                }
                let (lo, hi) = (i.min(j), i.max(j));
                let area = triangle_overlap(tris[lo], tris[hi]);
                if area > 1e-12 * areas[lo].max(areas[hi]) {
                    found.push(OverlapPair { first: lo, second: hi, area });
                }
            }
            found
        })
        .collect();
    pairs.sort_by(|a, b| (a.first, a.second).cmp(&(b.first, b.second)));
    pairs
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub min_jacobian: f64,
    pub eps: f64,
    /// Elements with `J_T ≤ eps`.
    pub zero_elements: Vec<usize>,
    pub passes: bool,
}

/// Default positivity threshold `1e-12·diam^n`.
pub fn default_positivity_eps(mesh: &Mesh) -> f64 {
    1e-12 * mesh.diameter().powi(mesh.dim() as i32)
}

pub fn jacobian_positivity(mesh: &Mesh, phi: &Deformation, eps: Option<f64>) -> Result<PositivityReport, InjectivityError> {
    phi.check_against(mesh)?;
    let eps = eps.unwrap_or_else(|| default_positivity_eps(mesh));
    let jac: Vec<f64> = element_gradients(mesh, phi).iter().map(|f| f.det()).collect();
    let min_jacobian = jac.iter().copied().fold(f64::INFINITY, f64::min);
    let zero_elements: Vec<usize> = (0..jac.len()).filter(|&t| !(jac[t] > eps)).collect();
    Ok(PositivityReport { min_jacobian, eps, passes: zero_elements.is_empty(), zero_elements })
}

/// Orientation-repaired fold of `[−1, 1]²`: the square is cut along
/// `x₁ = 0` into two `n × 2n` grids that share no vertices; the right half
/// is the identity and the left half is translated by `+1`, so both halves
/// cover `[0, 1] × [−1, 1]` with positive orientation.
pub fn repaired_fold(n: usize) -> (Mesh, Deformation) {
    let left = make_grid(n, 2 * n, Rect::new(-1.0, -1.0, 0.0, 1.0));
    let right = make_grid(n, 2 * n, Rect::new(0.0, -1.0, 1.0, 1.0));
    let offset = left.vertex_count();
    let mut vertices = left.vertices().to_vec();
    vertices.extend_from_slice(right.vertices());
    let mut simplices: Vec<Vec<usize>> = (0..left.simplex_count()).map(|t| left.simplex(t).to_vec()).collect();
    simplices.extend((0..right.simplex_count()).map(|t| right.simplex(t).iter().map(|v| v + offset).collect()));
    let mesh = Mesh::with_computed_boundary(2, vertices, simplices).expect("fold halves are valid");
    let images = (0..mesh.vertex_count())
        .map(|v| {
            let p = mesh.vertices()[v];
            if v < offset {
                [p[0] + 1.0, p[1], 0.0]
            } else {
                p
            }
        })
        .collect();
    let phi = Deformation::new(2, images).expect("finite images");
    (mesh, phi)
}
