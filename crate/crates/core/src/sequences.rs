//! Two closed-form families of homeomorphisms whose limits lose injectivity:
//! the radial power map `|x|^{k−1}x` on the punctured unit ball and a
//! piecewise shear of `[−1, 1]²` driven by `ξ_k(t) = (1 + (k−1)t)/(2k)`.
//!
//! The module evaluates both families and their gradients exactly, integrates
//! distortion norms with seam-aligned Gauss quadrature, and tracks
//! `∫θ·J(φ_k)` for the weak continuity of the Jacobian.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::injectivity::{overlap_pairs, OverlapPair};
use crate::mesh::{make_grid, DistortionKind, Deformation, Mesh, Rect};
use crate::numeric::{gauss4, pairwise_sum, ser_ext};
use crate::tensor::{distortion, SquareMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum SequenceError {
    #[error("point {0:?} is outside the domain of the family")]
    OutsideDomain(Vec<f64>),
    #[error("point {0:?} lies on a seam of the piecewise definition")]
    OnSeam(Vec<f64>),
    #[error("point has {got} coordinates, family is {expected}-dimensional")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Index of a family member: finite `k ≥ 1` or the pointwise limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Index {
    Finite(u64),
    Limit,
}

impl Index {
    fn label(&self) -> String {
        match self {
            Index::Finite(k) => k.to_string(),
            Index::Limit => "inf".into(),
        }
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for Index {
    type Err = SequenceError;
    fn from_str(s: &str) -> Result<Self, SequenceError> {
        let s = s.trim();
        if matches!(s, "inf" | "∞" | "limit") {
            return Ok(Index::Limit);
        }
        match s.parse::<u64>() {
            Ok(k) if k >= 1 => Ok(Index::Finite(k)),
            _ => Err(SequenceError::Parameter(format!("k must be an integer ≥ 1 or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    PuncturedBall { dim: usize },
    PlanarShear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceFamily {
    pub kind: FamilyKind,
    pub index: Index,
}

impl SequenceFamily {
    pub fn punctured_ball(dim: usize, index: Index) -> Result<Self, SequenceError> {
        if !(2..=3).contains(&dim) {
            return Err(SequenceError::Parameter(format!("ball dimension must be 2 or 3, got {dim}")));
        }
        Ok(SequenceFamily { kind: FamilyKind::PuncturedBall { dim }, index })
    }

    pub fn planar_shear(index: Index) -> Self {
        SequenceFamily { kind: FamilyKind::PlanarShear, index }
    }

    pub fn with_index(&self, index: Index) -> Self {
        SequenceFamily { kind: self.kind, index }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            FamilyKind::PuncturedBall { dim } => dim,
            FamilyKind::PlanarShear => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::PuncturedBall { .. } => "ball",
            FamilyKind::PlanarShear => "planar",
        }
    }

    fn check(&self, x: &[f64]) -> Result<(), SequenceError> {
        let n = self.dim();
        if x.len() != n {
            return Err(SequenceError::Dimension { expected: n, got: x.len() });
        }
        let inside = match self.kind {
            FamilyKind::PuncturedBall { .. } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                r2 > 0.0 && r2 < 1.0
            }
            FamilyKind::PlanarShear => x.iter().all(|v| v.abs() <= 1.0),
        };
        if !inside || x.iter().any(|v| !v.is_finite()) {
            return Err(SequenceError::OutsideDomain(x.to_vec()));
        }
        Ok(())
    }

    /// `φ_k(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, SequenceError> {
        self.check(x)?;
        Ok(match self.kind {
            FamilyKind::PuncturedBall { .. } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let scale = match self.index {
                    Index::Finite(k) => r.powi(k as i32 - 1),
                    Index::Limit => 0.0,
                };
                x.iter().map(|v| scale * v).collect()
            }
            FamilyKind::PlanarShear => vec![shear_first(self.index, x[0], x[1]), x[1]],
        })
    }

    /// `Dφ_k(x)`; points on the seams `|x₁| ∈ {0, ½}`, `x₂ = 0` are rejected
    /// for the shear family.
    pub fn eval_gradient(&self, x: &[f64]) -> Result<SquareMatrix, SequenceError> {
        self.check(x)?;
        match self.kind {
            FamilyKind::PuncturedBall { dim } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                Ok(match self.index {
                    Index::Finite(k) => {
                        let k = k as f64;
                        let base = r.powf(k - 1.0);
                        SquareMatrix::from_fn(dim, |i, j| {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            base * (delta + (k - 1.0) * x[i] * x[j] / (r * r))
                        })
                    }
                    Index::Limit => SquareMatrix::zero(dim),
                })
            }
            FamilyKind::PlanarShear => {
                let (x1, x2) = (x[0], x[1]);
                if x2 == 0.0 || x1 == 0.0 || x1.abs() == 0.5 {
                    return Err(SequenceError::OnSeam(x.to_vec()));
                }
                let (a, b) = shear_partials(self.index, x1, x2);
                Ok(SquareMatrix::from_rows2([[a, b], [0.0, 1.0]]))
            }
        }
    }
}

/// `ξ_k(t)` and `ξ_k′`; the limit is `ξ(t) = t/2`.
fn xi(index: Index, t: f64) -> (f64, f64) {
    match index {
        Index::Finite(k) => {
            let k = k as f64;
            ((1.0 + (k - 1.0) * t) / (2.0 * k), (k - 1.0) / (2.0 * k))
        }
        Index::Limit => (0.5 * t, 0.5),
    }
}

fn shear_first(index: Index, x1: f64, x2: f64) -> f64 {
    let (xi, _) = xi(index, x2.abs());
    let u = x1.abs();
    // second branch 2(1−ξ)u − (1−2ξ), regrouped so that u = 1 maps to 1 exactly
    let v = if u <= 0.5 { 2.0 * u * xi } else { 2.0 * u - 1.0 + 2.0 * xi * (1.0 - u) };
    v.copysign(x1)
}

/// `(∂φ₁/∂x₁, ∂φ₁/∂x₂)` off the seams.
fn shear_partials(index: Index, x1: f64, x2: f64) -> (f64, f64) {
    let (xi, dxi) = xi(index, x2.abs());
    let u = x1.abs();
    let s2 = x2.signum();
    if u < 0.5 {
        (2.0 * xi, 2.0 * x1 * dxi * s2)
    } else {
        (2.0 * (1.0 - xi), (-2.0 * x1 + 2.0 * x1.signum()) * dxi * s2)
    }
}

/// `sup_{|x| ≤ radius} |φ_k(x)|` over `samples` radii and directions.
pub fn sup_norm_on_ball(family: &SequenceFamily, radius: f64, samples: usize) -> Result<f64, SequenceError> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(SequenceError::Parameter(format!("radius must lie in (0, 1), got {radius}")));
    }
    let n = family.dim();
    let mut best: f64 = 0.0;
    for i in 1..=samples {
        let r = radius * i as f64 / samples as f64;
        for j in 0..samples {
            let a = 2.0 * PI * j as f64 / samples as f64;
            let x: Vec<f64> = if n == 2 {
                vec![r * a.cos(), r * a.sin()]
            } else {
                let c = 2.0 * (j as f64 + 0.5) / samples as f64 - 1.0;
                let s = (1.0 - c * c).sqrt();
                vec![r * s * a.cos(), r * s * a.sin(), r * c]
            };
            let y = family.eval(&x)?;
            best = best.max(y.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub family: String,
    pub k: String,
    pub s: f64,
    #[serde(serialize_with = "ser_ext")]
    pub norm: f64,
    pub resolution: usize,
    /// Relative change of the norm when the resolution is doubled.
    #[serde(serialize_with = "ser_ext")]
    pub richardson_ratio: f64,
}

/// Quadrature nodes `(point, weight)` for the family's domain.
///
/// Shear: by symmetry only the quarter `[0,1]²` is used (weights carry the
/// factor 4). Panels in `x₁` are aligned with the seam at `½`; panels in
/// `x₂` are graded geometrically towards the seam `x₂ = 0`, where the
/// Jacobian is of order `1/k`, down to `2⁻⁴⁰`.
/// Ball: Gauss in the radius times uniform (2D) or Gauss × uniform (3D)
/// angular rules.
fn quadrature(family: &SequenceFamily, resolution: usize) -> Vec<([f64; 3], f64)> {
    let r = resolution.max(1);
    let mut out = Vec::new();
    match family.kind {
        FamilyKind::PlanarShear => {
            let mut xs = Vec::new();
            for half in [(0.0, 0.5), (0.5, 1.0)] {
                for i in 0..r {
                    let a = half.0 + (half.1 - half.0) * i as f64 / r as f64;
                    let b = half.0 + (half.1 - half.0) * (i + 1) as f64 / r as f64;
                    xs.extend(gauss4(a, b));
                }
            }
            let mut ys = Vec::new();
            for octave in 0..40 {
                let hi = 0.5f64.powi(octave);
                let lo = 0.5 * hi;
                for i in 0..r {
                    let a = lo + (hi - lo) * i as f64 / r as f64;
                    let b = lo + (hi - lo) * (i + 1) as f64 / r as f64;
                    ys.extend(gauss4(a, b));
                }
            }
            let tail = 0.5f64.powi(40);
            ys.extend(gauss4(0.0, tail));
            for &(y, wy) in &ys {
                for &(x, wx) in &xs {
                    out.push(([x, y, 0.0], 4.0 * wx * wy));
                }
            }
        }
        FamilyKind::PuncturedBall { dim } => {
            let mut radii = Vec::new();
            for i in 0..4 * r {
                radii.extend(gauss4(i as f64 / (4 * r) as f64, (i + 1) as f64 / (4 * r) as f64));
            }
            let na = 16 * r;
            if dim == 2 {
                for &(rad, wr) in &radii {
                    for j in 0..na {
                        let a = 2.0 * PI * (j as f64 + 0.5) / na as f64;
                        out.push(([rad * a.cos(), rad * a.sin(), 0.0], wr * rad * 2.0 * PI / na as f64));
                    }
                }
            } else {
                let mut cs = Vec::new();
                for i in 0..2 * r {
                    let a = -1.0 + 2.0 * i as f64 / (2 * r) as f64;
                    let b = -1.0 + 2.0 * (i + 1) as f64 / (2 * r) as f64;
                    cs.extend(gauss4(a, b));
                }
                for &(rad, wr) in &radii {
                    for &(c, wc) in &cs {
                        let s = (1.0 - c * c).sqrt();
                        for j in 0..na {
                            let a = 2.0 * PI * (j as f64 + 0.5) / na as f64;
                            out.push((
                                [rad * s * a.cos(), rad * s * a.sin(), rad * c],
                                wr * rad * rad * wc * 2.0 * PI / na as f64,
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}

fn distortion_at(family: &SequenceFamily, x: &[f64; 3], which: DistortionKind) -> f64 {
    let f = family.eval_gradient(&x[..family.dim()]).expect("quadrature nodes avoid seams");
    let d = distortion(&f);
    match which {
        DistortionKind::Outer => d.outer,
        DistortionKind::Inner => d.inner,
    }
    .unwrap_or(f64::INFINITY)
}

/// `‖K(φ_k)‖_{L_s}` at one quadrature resolution; finite `k` only.
pub fn distortion_norm_quadrature(
    family: &SequenceFamily,
    s: f64,
    resolution: usize,
    which: DistortionKind,
) -> Result<f64, SequenceError> {
    if family.index == Index::Limit {
        return Err(SequenceError::Parameter("distortion norms are studied at finite k only".into()));
    }
    if !(s >= 1.0) || !s.is_finite() {
        return Err(SequenceError::Parameter(format!("s must be a finite exponent ≥ 1, got {s}")));
    }
    let nodes = quadrature(family, resolution);
    let terms: Vec<f64> = nodes.iter().map(|(x, w)| w * distortion_at(family, x, which).powf(s)).collect();
    Ok(pairwise_sum(&terms).powf(1.0 / s))
}

/// Norm table over `ks × exponents`, each entry computed at `resolution`
/// and `2·resolution`.
pub fn norm_study(
    family: FamilyKind,
    ks: &[u64],
    exponents: &[f64],
    resolution: usize,
    which: DistortionKind,
) -> Result<Vec<NormRow>, SequenceError> {
    if resolution == 0 {
        return Err(SequenceError::Parameter("resolution must be positive".into()));
    }
    let cells: Vec<(u64, f64)> = ks.iter().flat_map(|&k| exponents.iter().map(move |&s| (k, s))).collect();
    cells
        .par_iter()
        .map(|&(k, s)| {
            if k == 0 {
                return Err(SequenceError::Parameter("k must be at least 1".into()));
            }
            let fam = SequenceFamily { kind: family, index: Index::Finite(k) };
            let coarse = distortion_norm_quadrature(&fam, s, resolution, which)?;
            let fine = distortion_norm_quadrature(&fam, s, 2 * resolution, which)?;
            Ok(NormRow {
                family: fam.name().into(),
                k: k.to_string(),
                s,
                norm: fine,
                resolution: 2 * resolution,
                richardson_ratio: (fine - coarse).abs() / fine.abs(),
            })
        })
        .collect()
}

/// Smooth compactly supported test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Zero,
    /// `exp(1 − 1/(1 − |x−c|²/ρ²))` inside the ball of radius `ρ`, else 0.
    Bump { center: Vec<f64>, radius: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::Bump { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                let u = d2 / (radius * radius);
                if u >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u)).exp()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakMinorRow {
    pub family: String,
    pub k: String,
    pub integral: f64,
    /// `|I_k − I_prev|`, absent on the first row.
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakMinorReport {
    pub rows: Vec<WeakMinorRow>,
    /// `∫θ·J(φ₀)` for the pointwise limit at the same resolution.
    pub limit: f64,
    pub differences_decreasing: bool,
    /// `|I_last − I_secondlast| / scale` with `scale = max(|limit|, max_k |I_k|)`.
    pub final_relative_change: f64,
    /// `|I_last − limit| / scale`.
    pub final_relative_error: f64,
    pub converged: bool,
}

/// Midpoint-rule `∫θ·J(φ)` on a uniform grid of `resolution` cells per axis
/// over `[−1, 1]ⁿ` (the ball family is extended by zero outside `|x| < 1`).
pub fn theta_jacobian_integral(family: &SequenceFamily, theta: &TestFunction, resolution: usize) -> f64 {
    let n = family.dim();
    let m = resolution;
    let h = 2.0 / m as f64;
    let cells = m.pow(n as u32);
    let terms: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|c| {
            let mut x = [0.0; 3];
            let mut rem = c;
            for xi in x.iter_mut().take(n) {
                *xi = -1.0 + (rem % m) as f64 * h + 0.5 * h;
                rem /= m;
            }
            let x = &x[..n];
            let th = theta.eval(x);
            if th == 0.0 {
                return 0.0;
            }
            match family.eval_gradient(x) {
                Ok(f) => th * f.det() * h.powi(n as i32),
                Err(_) => 0.0,
            }
        })
        .collect();
    pairwise_sum(&terms)
}

/// `∫θ·J(φ_k)` along `ks` and for the limit map.
///
/// `resolution` should be a multiple of 4 so cell midpoints avoid the seams.
pub fn weak_minor_demo(
    family: FamilyKind,
    theta: &TestFunction,
    ks: &[u64],
    resolution: usize,
) -> Result<WeakMinorReport, SequenceError> {
    if resolution == 0 || resolution % 4 != 0 {
        return Err(SequenceError::Parameter(format!("resolution must be a positive multiple of 4, got {resolution}")));
    }
    if ks.is_empty() || ks.contains(&0) {
        return Err(SequenceError::Parameter("k list must be non-empty with entries ≥ 1".into()));
    }
    let fam = SequenceFamily { kind: family, index: Index::Limit };
    let values: Vec<f64> =
        ks.iter().map(|&k| theta_jacobian_integral(&fam.with_index(Index::Finite(k)), theta, resolution)).collect();
    let limit = theta_jacobian_integral(&fam, theta, resolution);
    let rows: Vec<WeakMinorRow> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| WeakMinorRow {
            family: fam.name().into(),
            k: ks[i].to_string(),
            integral: v,
            difference: (i > 0).then(|| (v - values[i - 1]).abs()),
        })
        .collect();
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.difference).collect();
    let differences_decreasing = diffs.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    let scale = values.iter().fold(limit.abs(), |a, v| a.max(v.abs()));
    let last = *values.last().expect("non-empty");
    let (final_relative_change, final_relative_error) = if scale == 0.0 {
        (0.0, 0.0)
    } else {
        (diffs.last().copied().unwrap_or(0.0) / scale, (last - limit).abs() / scale)
    };
    Ok(WeakMinorReport {
        rows,
        limit,
        differences_decreasing,
        converged: differences_decreasing && final_relative_change <= 1e-3 && final_relative_error <= 1e-3,
        final_relative_change,
        final_relative_error,
    })
}

/// Seam-aligned triangulation of `[−1, 1]²` with `n × n` cells (`n` a
/// multiple of 4) and the nodal interpolant of the shear map.
pub fn planar_mesh_deformation(index: Index, n: usize) -> Result<(Mesh, Deformation), SequenceError> {
    if n == 0 || n % 4 != 0 {
        return Err(SequenceError::Parameter(format!("cells per side must be a positive multiple of 4, got {n}")));
    }
    let mesh = make_grid(n, n, Rect::new(-1.0, -1.0, 1.0, 1.0));
    let phi = Deformation::from_map(&mesh, |p| [shear_first(index, p[0], p[1]), p[1], 0.0]);
    Ok((mesh, phi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub k: String,
    pub min_jacobian: f64,
    pub overlaps: Vec<OverlapPair>,
    pub certified: bool,
}

/// Per-`k` homeomorphism evidence for the shear family on an `n × n` grid:
/// all element Jacobians positive and no overlapping image triangles.
pub fn shear_certificates(ks: &[Index], n: usize) -> Result<Vec<Certificate>, SequenceError> {
    ks.iter()
        .map(|&k| {
            let (mesh, phi) = planar_mesh_deformation(k, n)?;
            let min_jacobian = crate::mesh::element_jacobians(&mesh, &phi).into_iter().fold(f64::INFINITY, f64::min);
            let overlaps = overlap_pairs(&mesh, &phi);
            Ok(Certificate {
                k: k.label(),
                min_jacobian,
                certified: min_jacobian > 0.0 && overlaps.is_empty(),
                overlaps,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenderPoint {
    pub line: usize,
    /// 0 for lines of constant `x₂`, 1 for constant `x₁`.
    pub direction: u8,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

/// Images of `lines + 1` grid lines per direction, each sampled at
/// `samples + 1` points, for plotting the deformed square.
pub fn render_grid(family: &SequenceFamily, lines: usize, samples: usize) -> Result<Vec<RenderPoint>, SequenceError> {
    if family.kind != FamilyKind::PlanarShear {
        return Err(SequenceError::Parameter("rendering is provided for the planar family".into()));
    }
    if lines == 0 || samples == 0 {
        return Err(SequenceError::Parameter("lines and samples must be positive".into()));
    }
    let mut out = Vec::with_capacity(2 * (lines + 1) * (samples + 1));
    for direction in 0..2u8 {
        for l in 0..=lines {
            let c = -1.0 + 2.0 * l as f64 / lines as f64;
            for i in 0..=samples {
                let t = -1.0 + 2.0 * i as f64 / samples as f64;
                let (x1, x2) = if direction == 0 { (t, c) } else { (c, t) };
                let y = family.eval(&[x1, x2])?;
                out.push(RenderPoint { line: l, direction, x1, x2, y1: y[0], y2: y[1] });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shear(k: u64) -> SequenceFamily {
        SequenceFamily::planar_shear(Index::Finite(k))
    }

    #[test]
    fn shear_k1_is_identity() {
        let f = shear(1);
        for &(a, b) in &[(0.3, 0.7), (-0.8, -0.2), (0.5, 0.0), (1.0, 1.0), (-0.6, 0.4)] {
            let y = f.eval(&[a, b]).unwrap();
            assert_eq!(y, vec![a, b]);
        }
        let g = f.eval_gradient(&[0.3, 0.2]).unwrap();
        assert_eq!(g, SquareMatrix::identity(2));
    }

    #[test]
    fn shear_boundary_and_symmetry() {
        for k in [1, 2, 7, 1024] {
            let f = shear(k);
            for &t in &[-1.0, -0.3, 0.0, 0.6, 1.0] {
                assert_eq!(f.eval(&[1.0, t]).unwrap()[0], 1.0);
                assert_eq!(f.eval(&[-1.0, t]).unwrap()[0], -1.0);
            }
            for &(a, b) in &[(0.3, 0.7), (0.8, 0.2), (0.1, 0.95)] {
                let v = f.eval(&[a, b]).unwrap()[0];
                assert_eq!(f.eval(&[-a, b]).unwrap()[0], -v);
                assert_eq!(f.eval(&[a, -b]).unwrap()[0], v);
            }
        }
    }

    #[test]
    fn shear_continuous_across_half() {
        for k in [2, 5, 100] {
            let f = shear(k);
            let left = f.eval(&[0.5, 0.3]).unwrap()[0];
            let right = f.eval(&[0.5 + 1e-12, 0.3]).unwrap()[0];
            assert!((left - right).abs() < 1e-11);
        }
    }

    #[test]
    fn gradients_match_differences() {
        let fams = [shear(3), shear(64), SequenceFamily::punctured_ball(2, Index::Finite(3)).unwrap(),
            SequenceFamily::punctured_ball(3, Index::Finite(4)).unwrap()];
        let pts: [&[f64]; 4] = [&[0.3, 0.4], &[-0.7, -0.2], &[0.2, -0.5], &[0.1, 0.3, -0.4]];
        for (f, x) in fams.iter().zip(pts) {
            let g = f.eval_gradient(x).unwrap();
            let h = 1e-6;
            for j in 0..x.len() {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                let (yp, ym) = (f.eval(&xp).unwrap(), f.eval(&xm).unwrap());
                for i in 0..x.len() {
                    let fd = (yp[i] - ym[i]) / (2.0 * h);
                    assert!((fd - g.get(i, j)).abs() < 1e-7 * (1.0 + fd.abs()), "{f:?} {i}{j}");
                }
            }
        }
    }

    #[test]
    fn seams_rejected() {
        assert!(matches!(shear(2).eval_gradient(&[0.5, 0.3]), Err(SequenceError::OnSeam(_))));
        assert!(matches!(shear(2).eval_gradient(&[0.2, 0.0]), Err(SequenceError::OnSeam(_))));
        assert!(shear(2).eval(&[1.5, 0.0]).is_err());
        let ball = SequenceFamily::punctured_ball(2, Index::Finite(2)).unwrap();
        assert!(ball.eval(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn ball_radial_eigenvalues() {
        let k = 3u64;
        let t: f64 = 0.6;
        let f = SequenceFamily::punctured_ball(3, Index::Finite(k)).unwrap();
        let g = f.eval_gradient(&[t, 0.0, 0.0]).unwrap();
        let base = t.powi(k as i32 - 1);
        assert!((g.get(0, 0) - k as f64 * base).abs() < 1e-15);
        assert!((g.get(1, 1) - base).abs() < 1e-15 && (g.get(2, 2) - base).abs() < 1e-15);
        assert_eq!(g.get(0, 1), 0.0);
    }

    /// Closed form of `‖K‖_{L₁}` for the shear family on `[−1,1]²`.
    fn l1_oracle(k: f64) -> f64 {
        let d = (k - 1.0) / (2.0 * k);
        let x_part = 0.5 + d * d / 6.0;
        let (inv1, inv2) = if k == 1.0 {
            (1.0, 1.0)
        } else {
            (k * k.ln() / (k - 1.0), k / (k - 1.0) * ((2.0 * k - 1.0) / k).ln())
        };
        let mean_xi = (1.0 + (k - 1.0) / 2.0) / (2.0 * k);
        let b1 = 0.5 * 2.0 * mean_xi + x_part * inv1;
        let b2 = 0.5 * 2.0 * (1.0 - mean_xi) + x_part * inv2;
        4.0 * (b1 + b2)
    }

    #[test]
    fn l1_norm_matches_closed_form() {
        for k in [1u64, 2, 16, 1024] {
            let q = distortion_norm_quadrature(&shear(k), 1.0, 4, DistortionKind::Outer).unwrap();
            let o = l1_oracle(k as f64);
            assert!((q - o).abs() < 1e-9 * o, "k={k}: {q} vs {o}");
        }
        assert!((l1_oracle(1.0) - 8.0).abs() < 1e-15);
    }

    #[test]
    fn ball_norm_is_constant_times_volume() {
        let k = 3.0;
        let f = SequenceFamily::punctured_ball(2, Index::Finite(3)).unwrap();
        let q = distortion_norm_quadrature(&f, 2.0, 2, DistortionKind::Outer).unwrap();
        let ko = (k * k + 1.0) / k;
        assert!((q - ko * PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn zero_theta_gives_zero() {
        let r = weak_minor_demo(FamilyKind::PlanarShear, &TestFunction::Zero, &[1, 2, 4], 16).unwrap();
        assert!(r.rows.iter().all(|row| row.integral == 0.0));
        assert_eq!(r.limit, 0.0);
    }

    #[test]
    fn sup_norm_shrinks() {
        let f = SequenceFamily::punctured_ball(2, Index::Finite(40)).unwrap();
        let s = sup_norm_on_ball(&f, 0.9, 32).unwrap();
        assert!((s - 0.9f64.powi(40)).abs() < 1e-12);
    }

    #[test]
    fn interpolant_min_jacobian() {
        let k = 1u64 << 20;
        let (m, phi) = planar_mesh_deformation(Index::Finite(k), 8).unwrap();
        let min = crate::mesh::element_jacobians(&m, &phi).into_iter().fold(f64::INFINITY, f64::min);
        assert!((min - 1.0 / k as f64).abs() < 1e-12 / k as f64 * 1e3);
    }

    #[test]
    fn render_shape() {
        let pts = render_grid(&shear(4), 8, 10).unwrap();
        assert_eq!(pts.len(), 2 * 9 * 11);
    }
}
