//! Small dense matrices (2×2 and 3×3) and pointwise distortion quantities.
//!
//! Everything here is closed form: determinant, adjugate, Frobenius norm,
//! singular values through the characteristic polynomial of `FᵀF`, and the
//! outer/inner distortion coefficients with their degenerate-case conventions.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("matrix dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    WrongLength { dim: usize, expected: usize, got: usize },
    #[error("matrix entry ({row},{col}) is not finite")]
    NonFinite { row: usize, col: usize },
}

/// An `n×n` real matrix with `n ∈ {2, 3}`.
///
/// Storage is always `3×3`; for `dim == 2` the third row and column are zero.
#[derive(Clone, Copy, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    e: [[f64; 3]; 3],
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.dim).map(|i| &self.e[i][..self.dim]).collect();
        f.debug_struct("SquareMatrix")
            .field("dim", &self.dim)
            .field("rows", &rows)
            .finish()
    }
}

fn check_dim(dim: usize) -> Result<(), TensorError> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(TensorError::BadDimension(dim))
    }
}

impl SquareMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn new(dim: usize, entries: &[f64]) -> Result<Self, TensorError> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(TensorError::WrongLength {
                dim,
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let mut e = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                let v = entries[i * dim + j];
                if !v.is_finite() {
                    return Err(TensorError::NonFinite { row: i, col: j });
                }
                e[i][j] = v;
            }
        }
        Ok(Self { dim, e })
    }

    pub fn from_rows2(rows: [[f64; 2]; 2]) -> Self {
        let mut e = [[0.0; 3]; 3];
        for i in 0..2 {
            e[i][..2].copy_from_slice(&rows[i]);
        }
        Self { dim: 2, e }
    }

    pub fn from_rows3(rows: [[f64; 3]; 3]) -> Self {
        Self { dim: 3, e: rows }
    }

    /// Builds a matrix from a closure; entries are not validated.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        let mut e = [[0.0; 3]; 3];
        for (i, row) in e.iter_mut().enumerate().take(dim) {
            for (j, v) in row.iter_mut().enumerate().take(dim) {
                *v = f(i, j);
            }
        }
        Self { dim, e }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| 0.0)
    }

    pub fn diag(values: &[f64]) -> Result<Self, TensorError> {
        check_dim(values.len())?;
        let dim = values.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, v) in values.iter().enumerate() {
            entries[i * dim + i] = *v;
        }
        Self::new(dim, &entries)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.e[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.e[i][j] = v;
    }

    /// Row-major entries.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            out.extend_from_slice(&self.e[i][..self.dim]);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.e[j][i])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.dim, |i, j| s * self.e[i][j])
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.e[i][i]).sum()
    }

    /// Frobenius inner product `Σ Aᵢⱼ Bᵢⱼ`.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.e[i][j] * other.e[i][j];
            }
        }
        s
    }

    pub fn det(&self) -> f64 {
        let e = &self.e;
        match self.dim {
            2 => e[0][0] * e[1][1] - e[0][1] * e[1][0],
            _ => {
                e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
                    - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
                    + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
            }
        }
    }

    /// Transposed cofactor matrix: `F · adj(F) = det(F) · I`.
    pub fn adjugate(&self) -> Self {
        let e = &self.e;
        match self.dim {
            2 => Self::from_rows2([[e[1][1], -e[0][1]], [-e[1][0], e[0][0]]]),
            _ => Self::from_fn(3, |i, j| {
                // adj(F)_ij = cofactor_ji
                let (r0, r1) = other_two(j);
                let (c0, c1) = other_two(i);
                let minor = e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0];
                if (i + j) % 2 == 0 {
                    minor
                } else {
                    -minor
                }
            }),
        }
    }

    /// Cofactor matrix, `∂ det F / ∂F`.
    pub fn cofactor(&self) -> Self {
        self.adjugate().transpose()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(1.0 / d))
    }

    /// Matrix `D` with `Dᵢⱼ = G : ∂adj(F)/∂Fᵢⱼ`, i.e. the gradient of
    /// `F ↦ G : adj(F)` for a fixed `G`.
    pub fn adjugate_pullback(&self, g: &Self) -> Self {
        assert_eq!(self.dim, g.dim);
        match self.dim {
            // adj is linear in 2D: G : adj(F) = g00 f11 − g01 f01 − g10 f10 + g11 f00
            2 => Self::from_rows2([
                [g.e[1][1], -g.e[0][1]],
                [-g.e[1][0], g.e[0][0]],
            ]),
            _ => {
                // adj is quadratic in 3D and adj(Eᵢⱼ) = 0 for a single-entry
                // matrix, so adj(F + Eᵢⱼ) − adj(F) is the exact derivative.
                let base = self.adjugate();
                Self::from_fn(3, |i, j| {
                    let mut shifted = *self;
                    shifted.e[i][j] += 1.0;
                    (shifted.adjugate() - base).dot(g)
                })
            }
        }
    }
}

fn other_two(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl Add for SquareMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| self.e[i][j] + rhs.e[i][j])
    }
}

impl Sub for SquareMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| self.e[i][j] - rhs.e[i][j])
    }
}

impl Neg for SquareMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for SquareMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        Self::from_fn(n, |i, j| (0..n).map(|k| self.e[i][k] * rhs.e[k][j]).sum())
    }
}

impl Mul<f64> for SquareMatrix {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..self.dim).map(|i| self.e[i][..self.dim].to_vec()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(serde::de::Error::custom("matrix rows must all have length dim"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        SquareMatrix::new(dim, &flat).map_err(serde::de::Error::custom)
    }
}

/// Singular values in descending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    dim: usize,
    values: [f64; 3],
}

impl Spectrum {
    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }

    /// `Σ σᵢᵖ`, the `p`-th power of the Schatten-`p` norm.
    pub fn power_sum(&self, p: f64) -> f64 {
        self.as_slice().iter().map(|s| s.powf(p)).sum()
    }
}

/// Singular values of `adj F` from those of `F` (products of the other
/// `n − 1` values; unordered).
pub fn adjugate_spectrum(s: &Spectrum) -> Vec<f64> {
    let v = s.as_slice();
    match s.dim {
        2 => vec![v[1], v[0]],
        _ => vec![v[1] * v[2], v[0] * v[2], v[0] * v[1]],
    }
}

/// Singular values of `F`, descending, from the eigenvalues of `FᵀF`.
///
/// The largest eigenvalue comes from the trigonometric solution of the
/// characteristic cubic; the remaining two are recovered from the invariants
/// `|adj F|² = λ₁λ₂ + λ₁λ₃ + λ₂λ₃` and `det² F = λ₁λ₂λ₃`, which keeps small
/// singular values accurate to relative precision.
pub fn singular_spectrum(f: &SquareMatrix) -> Spectrum {
    match f.dim {
        2 => {
            let (a, b, c, d) = (f.e[0][0], f.e[0][1], f.e[1][0], f.e[1][1]);
            let s = (a + d).hypot(c - b);
            let t = (a - d).hypot(b + c);
            let s1 = 0.5 * (s + t);
            let s2 = if s1 > 0.0 { (f.det().abs() / s1).min(s1) } else { 0.0 };
            Spectrum { dim: 2, values: [s1, s2, 0.0] }
        }
        _ => {
            let c = f.transpose() * *f;
            let lam = sym_eigenvalues3(&c);
            let l1 = lam[0].max(0.0);
            let s2_inv = f.adjugate().frobenius_sq();
            let det = f.det();
            let s3_inv = det * det;
            let (l2, l3) = if l1 > 0.0 {
                let prod = s3_inv / l1;
                let sum = ((s2_inv - prod) / l1).max(0.0);
                let disc = (sum * sum - 4.0 * prod).max(0.0);
                let l2 = 0.5 * (sum + disc.sqrt());
                let l3 = if l2 > 0.0 { prod / l2 } else { 0.0 };
                (l2, l3)
            } else {
                (0.0, 0.0)
            };
            // Near a repeated root the split between l2 and l3 carries the
            // square root of the rounding error. Their product stays exact,
            // so sort rather than clamp to keep symmetric functions accurate.
            let mut v = [l1.sqrt(), l2.sqrt(), l3.sqrt()];
            v.sort_by(|a, b| b.total_cmp(a));
            Spectrum { dim: 3, values: v }
        }
    }
}

/// Eigenvalues of a symmetric 3×3 matrix, descending.
fn sym_eigenvalues3(c: &SquareMatrix) -> [f64; 3] {
    let q = c.trace() / 3.0;
    let shifted = *c - SquareMatrix::identity(3).scale(q);
    let p2 = shifted.frobenius_sq() / 6.0;
    if p2 <= 1e-30 * q * q || p2 == 0.0 {
        return [q, q, q];
    }
    let p = p2.sqrt();
    let r = (shifted.scale(1.0 / p).det() / 2.0).clamp(-1.0, 1.0);
    if 1.0 - r.abs() < 1e-14 {
        // near a double root the arccos loses accuracy
        let (mut vals, _) = sym_eigen(c);
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        return vals;
    }
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    [l1, l2, l3]
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues (unsorted, entries `0..dim`) and the orthogonal matrix
/// whose columns are the corresponding eigenvectors.
pub fn sym_eigen(c: &SquareMatrix) -> ([f64; 3], SquareMatrix) {
    let n = c.dim;
    let mut a = *c;
    let mut v = SquareMatrix::identity(n);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.e[i][j] * a.e[i][j];
            }
        }
        let scale = a.frobenius_sq();
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.e[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.e[q][q] - a.e[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a.e[k][p];
                    let akq = a.e[k][q];
                    a.e[k][p] = cs * akp - sn * akq;
                    a.e[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a.e[p][k];
                    let aqk = a.e[q][k];
                    a.e[p][k] = cs * apk - sn * aqk;
                    a.e[q][k] = sn * apk + cs * aqk;
                }
                for k in 0..n {
                    let vkp = v.e[k][p];
                    let vkq = v.e[k][q];
                    v.e[k][p] = cs * vkp - sn * vkq;
                    v.e[k][q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    let mut vals = [0.0; 3];
    for (i, val) in vals.iter_mut().enumerate().take(n) {
        *val = a.e[i][i];
    }
    (vals, v)
}

/// `S^α` for symmetric positive semidefinite `S`, via its eigen-decomposition.
pub fn sym_power(s: &SquareMatrix, alpha: f64) -> SquareMatrix {
    let (vals, v) = sym_eigen(s);
    let n = s.dim;
    let powered: Vec<f64> = (0..n)
        .map(|i| {
            let l = vals[i].max(0.0);
            if alpha == 0.0 {
                1.0
            } else {
                l.powf(alpha)
            }
        })
        .collect();
    SquareMatrix::from_fn(n, |i, j| (0..n).map(|k| v.e[i][k] * powered[k] * v.e[j][k]).sum())
}

/// Pointwise outer/inner distortion of a deformation gradient.
///
/// `outer`/`inner` are `None` when the Jacobian is negative; the coefficients
/// are only defined for orientation-preserving gradients. `f64::INFINITY` is
/// the sentinel for `J = 0` with `adj F ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionValues {
    pub outer: Option<f64>,
    pub inner: Option<f64>,
    pub jacobian: f64,
    pub adj_norm: f64,
    pub orientation_reversed: bool,
}

/// `K_O = |F|ⁿ / J` and `K_I = |adj F|ⁿ / Jⁿ⁻¹`.
///
/// At `J = 0`: `K_O = 1`; `K_I = 1` if `adj F = 0` and `+∞` otherwise. Note
/// that finite distortion already forces `F = 0` wherever `J = 0`, so the
/// `K_O = 1` convention only matters for maps that fail that condition.
pub fn distortion(f: &SquareMatrix) -> DistortionValues {
    let n = f.dim as i32;
    let jacobian = f.det();
    let adj = f.adjugate();
    let adj_norm = adj.frobenius();
    if jacobian < 0.0 {
        return DistortionValues {
            outer: None,
            inner: None,
            jacobian,
            adj_norm,
            orientation_reversed: true,
        };
    }
    let (outer, inner) = if jacobian == 0.0 {
        (1.0, if adj_norm == 0.0 { 1.0 } else { f64::INFINITY })
    } else if n == 2 {
        // |adj F| = |F| in the plane; share one evaluation so K_O = K_I bit for bit
        let k = f.frobenius_sq() / jacobian;
        (k, k)
    } else {
        (
            norm_pow(f.frobenius_sq(), n) / jacobian,
            norm_pow(adj.frobenius_sq(), n) / jacobian.powi(n - 1),
        )
    };
    DistortionValues {
        outer: Some(outer),
        inner: Some(inner),
        jacobian,
        adj_norm,
        orientation_reversed: false,
    }
}

/// `|A|ⁿ` from `|A|²`, avoiding the rounding of the square root for even `n`.
fn norm_pow(sq: f64, n: i32) -> f64 {
    if n % 2 == 0 {
        sq.powi(n / 2)
    } else {
        sq.powi(n / 2) * sq.sqrt()
    }
}

/// Outer distortion operator function `|F| / |det F|^{1/p}`, zero on the
/// zero set of the Jacobian.
pub fn operator_outer(f: &SquareMatrix, p: f64) -> f64 {
    let j = f.det();
    if j == 0.0 {
        0.0
    } else {
        f.frobenius() / j.abs().powf(1.0 / p)
    }
}

/// Inner distortion operator function `|adj F| / |det F|^{(n-1)/p}`.
pub fn operator_inner(f: &SquareMatrix, p: f64) -> f64 {
    let j = f.det();
    if j == 0.0 {
        0.0
    } else {
        let n = f.dim as f64;
        f.adjugate().frobenius() / j.abs().powf((n - 1.0) / p)
    }
}

/// Gradient of `K_I(F)` with respect to `F`, valid for `det F > 0`.
pub fn inner_distortion_gradient(f: &SquareMatrix) -> SquareMatrix {
    let j = f.det();
    let cof = f.cofactor();
    match f.dim {
        2 => {
            // K_I = |F|² / J in the plane
            let fs = f.frobenius_sq();
            f.scale(2.0 / j) - cof.scale(fs / (j * j))
        }
        _ => {
            let a = f.adjugate();
            let an = a.frobenius();
            // d|A|² = 2 A : dA, so d|A|³ = 3|A| (A : dA)
            let d_an3 = f.adjugate_pullback(&a).scale(3.0 * an);
            d_an3.scale(1.0 / (j * j)) - cof.scale(2.0 * an.powi(3) / (j * j * j))
        }
    }
}

/// Gradient of `K_O(F)` with respect to `F`, valid for `det F > 0`.
pub fn outer_distortion_gradient(f: &SquareMatrix) -> SquareMatrix {
    let j = f.det();
    let n = f.dim as i32;
    let fnorm = f.frobenius();
    let cof = f.cofactor();
    // d|F|ⁿ = n |F|ⁿ⁻² F
    f.scale(n as f64 * fnorm.powi(n - 2) / j) - cof.scale(fnorm.powi(n) / (j * j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m3(r: [[f64; 3]; 3]) -> SquareMatrix {
        SquareMatrix::from_rows3(r)
    }

    #[test]
    fn determinant_closed_forms() {
        assert_eq!(SquareMatrix::identity(2).det(), 1.0);
        assert_eq!(SquareMatrix::diag(&[2.0, 1.0]).unwrap().det(), 2.0);
        assert_eq!(SquareMatrix::diag(&[1.0, 2.0, 3.0]).unwrap().det(), 6.0);
    }

    #[test]
    fn adjugate_closed_forms() {
        assert_eq!(SquareMatrix::identity(3).adjugate(), SquareMatrix::identity(3));
        assert_eq!(
            SquareMatrix::diag(&[2.0, 1.0]).unwrap().adjugate(),
            SquareMatrix::diag(&[1.0, 2.0]).unwrap()
        );
        let f = SquareMatrix::from_rows2([[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(f.adjugate(), SquareMatrix::from_rows2([[4.0, -2.0], [-3.0, 1.0]]));
    }

    #[test]
    fn adjugate_identity_3d() {
        let f = m3([[1.0, 2.0, -1.0], [0.5, 3.0, 2.0], [-2.0, 1.0, 4.0]]);
        let a = f.adjugate();
        let r = f * a - SquareMatrix::identity(3).scale(f.det());
        assert!(r.frobenius() < 1e-12 * f.frobenius() * a.frobenius());
    }

    #[test]
    fn frobenius_values() {
        assert_eq!(SquareMatrix::identity(3).frobenius(), 3f64.sqrt());
        assert_eq!(SquareMatrix::diag(&[2.0, 1.0]).unwrap().frobenius(), 5f64.sqrt());
        assert_eq!(SquareMatrix::zero(2).frobenius(), 0.0);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(SquareMatrix::new(4, &[0.0; 16]), Err(TensorError::BadDimension(4)));
        assert!(matches!(
            SquareMatrix::new(2, &[1.0, f64::NAN, 0.0, 1.0]),
            Err(TensorError::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            SquareMatrix::new(3, &[1.0; 4]),
            Err(TensorError::WrongLength { .. })
        ));
    }

    #[test]
    fn spectrum_closed_forms() {
        assert_eq!(singular_spectrum(&SquareMatrix::identity(3)).to_vec(), vec![1.0, 1.0, 1.0]);
        let s = singular_spectrum(&SquareMatrix::diag(&[3.0, -2.0]).unwrap());
        assert!((s.as_slice()[0] - 3.0).abs() < 1e-15);
        assert!((s.as_slice()[1] - 2.0).abs() < 1e-15);
        let s = singular_spectrum(&SquareMatrix::diag(&[1.0, 5.0, 2.0]).unwrap());
        let v = s.to_vec();
        assert!((v[0] - 5.0).abs() < 1e-13 && (v[1] - 2.0).abs() < 1e-13 && (v[2] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn spectrum_of_rank_deficient() {
        let s = singular_spectrum(&SquareMatrix::diag(&[1.0, 1.0, 0.0]).unwrap()).to_vec();
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14 && s[2] == 0.0);
        let s = singular_spectrum(&SquareMatrix::zero(3)).to_vec();
        assert_eq!(s, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn distortion_identity_and_footnotes() {
        let d = distortion(&SquareMatrix::identity(2));
        assert_eq!(d.outer, Some(2.0));
        assert_eq!(d.inner, Some(2.0));
        let d = distortion(&SquareMatrix::zero(3));
        assert_eq!((d.outer, d.inner), (Some(1.0), Some(1.0)));
        let d = distortion(&SquareMatrix::diag(&[1.0, 1.0, 0.0]).unwrap());
        assert_eq!(d.outer, Some(1.0));
        assert_eq!(d.inner, Some(f64::INFINITY));
        // rank one in 3D: adj F = 0
        let d = distortion(&SquareMatrix::diag(&[1.0, 0.0, 0.0]).unwrap());
        assert_eq!((d.outer, d.inner), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn distortion_negative_jacobian_is_flagged() {
        let d = distortion(&SquareMatrix::diag(&[-1.0, 1.0]).unwrap());
        assert!(d.orientation_reversed);
        assert_eq!(d.outer, None);
        assert_eq!(d.jacobian, -1.0);
    }

    #[test]
    fn operator_functions() {
        assert_eq!(operator_outer(&SquareMatrix::zero(2), 1.5), 0.0);
        assert_eq!(operator_inner(&SquareMatrix::zero(3), 4.0), 0.0);
        assert!((operator_outer(&SquareMatrix::identity(3), 3.0) - 3f64.sqrt()).abs() < 1e-15);
        assert!((operator_inner(&SquareMatrix::identity(2), 2.0) - 2f64.sqrt()).abs() < 1e-15);
        let f = m3([[2.0, 0.3, 0.0], [0.1, 1.0, 0.2], [0.0, -0.4, 0.7]]);
        let d = distortion(&f);
        let ko = operator_outer(&f, 3.0).powi(3);
        let ki = operator_inner(&f, 3.0).powi(3);
        assert!((ko / d.outer.unwrap() - 1.0).abs() < 1e-12);
        assert!((ki / d.inner.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distortion_gradients_match_differences() {
        let f = m3([[1.2, 0.3, -0.1], [0.2, 0.9, 0.25], [0.05, -0.3, 1.1]]);
        let gi = inner_distortion_gradient(&f);
        let go = outer_distortion_gradient(&f);
        let h = 1e-6;
        for i in 0..3 {
            for j in 0..3 {
                let mut fp = f;
                let mut fm = f;
                fp.set(i, j, f.get(i, j) + h);
                fm.set(i, j, f.get(i, j) - h);
                let di = (distortion(&fp).inner.unwrap() - distortion(&fm).inner.unwrap()) / (2.0 * h);
                let d_o = (distortion(&fp).outer.unwrap() - distortion(&fm).outer.unwrap()) / (2.0 * h);
                assert!((di - gi.get(i, j)).abs() < 1e-6 * (1.0 + di.abs()), "inner {i}{j}");
                assert!((d_o - go.get(i, j)).abs() < 1e-6 * (1.0 + d_o.abs()), "outer {i}{j}");
            }
        }
    }

    #[test]
    fn sym_power_square_root() {
        let f = m3([[1.0, 0.2, 0.0], [0.3, 2.0, 0.1], [0.0, 0.4, 1.5]]);
        let c = f.transpose() * f;
        let r = sym_power(&c, 0.5);
        assert!((r * r - c).frobenius() < 1e-12 * c.frobenius());
    }
}
