//! Stored-energy models, their convex representatives on the minor vector,
//! analytic first Piola–Kirchhoff stresses and sampling probes for
//! polyconvexity and coercivity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{adjugate_spectrum, singular_spectrum, sym_power, SquareMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("invalid model parameter: {0}")]
    Parameter(String),
    #[error("gradient undefined: det F = {0} is not positive")]
    Degenerate(f64),
    #[error("minor vector outside the admissible set: determinant {0} < 0")]
    OutsideDomain(f64),
}

/// Stored-energy function `W(F)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub enum EnergyModel {
    /// `a Σσᵢᵖ + b Σ σᵢ(adj F)^q + c Jʳ + d J⁻ᵐ`, `+∞` for `J ≤ 0`.
    Ogden { a: f64, b: f64, c: f64, d: f64, p: f64, q: f64, r: f64, m: f64 },
    /// Planar analogue `a |F|ᵖ + c Jʳ + d J⁻ᵐ` (the adjugate term is redundant
    /// in 2D since `|adj F| = |F|`).
    Ogden2d { a: f64, c: f64, d: f64, p: f64, r: f64, m: f64 },
    /// `a Σσᵢ³`: polyconvex and coercive but without a determinant barrier.
    NeoTrace { a: f64 },
    /// `λ/2 (tr E)² + μ tr E²` with `E = (FᵀF − I)/2`. Not polyconvex.
    SaintVenantKirchhoff { lambda: f64, mu: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ModelSpec {
    Ogden { a: f64, b: f64, c: f64, d: f64, p: f64, q: f64, r: f64, m: f64 },
    Ogden2d { a: f64, c: f64, d: f64, p: f64, r: f64, m: f64 },
    #[serde(alias = "neo-trace")]
    Neotrace { a: f64 },
    #[serde(alias = "saint-venant-kirchhoff")]
    Svk { lambda: f64, mu: f64 },
}

impl TryFrom<ModelSpec> for EnergyModel {
    type Error = EnergyError;
    fn try_from(s: ModelSpec) -> Result<Self, EnergyError> {
        match s {
            ModelSpec::Ogden { a, b, c, d, p, q, r, m } => EnergyModel::ogden(a, b, c, d, p, q, r, m),
            ModelSpec::Ogden2d { a, c, d, p, r, m } => EnergyModel::ogden_2d(a, c, d, p, r, m),
            ModelSpec::Neotrace { a } => EnergyModel::neo_trace(a),
            ModelSpec::Svk { lambda, mu } => EnergyModel::saint_venant_kirchhoff(lambda, mu),
        }
    }
}

impl From<EnergyModel> for ModelSpec {
    fn from(m: EnergyModel) -> Self {
        match m {
            EnergyModel::Ogden { a, b, c, d, p, q, r, m } => ModelSpec::Ogden { a, b, c, d, p, q, r, m },
            EnergyModel::Ogden2d { a, c, d, p, r, m } => ModelSpec::Ogden2d { a, c, d, p, r, m },
            EnergyModel::NeoTrace { a } => ModelSpec::Neotrace { a },
            EnergyModel::SaintVenantKirchhoff { lambda, mu } => ModelSpec::Svk { lambda, mu },
        }
    }
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), EnergyError> {
    if ok {
        Ok(())
    } else {
        Err(EnergyError::Parameter(msg()))
    }
}

fn finite(names: &[(&str, f64)]) -> Result<(), EnergyError> {
    for (n, v) in names {
        require(v.is_finite(), || format!("{n} must be finite"))?;
    }
    Ok(())
}

impl EnergyModel {
    /// Requires `a, b, c, d > 0`, `p, q > 3`, `r > 1`, `m > 2q/(q − 3)`.
    #[allow(clippy::too_many_arguments)]
    pub fn ogden(a: f64, b: f64, c: f64, d: f64, p: f64, q: f64, r: f64, m: f64) -> Result<Self, EnergyError> {
        finite(&[("a", a), ("b", b), ("c", c), ("d", d), ("p", p), ("q", q), ("r", r), ("m", m)])?;
        require(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0, || {
            format!("a, b, c, d must be positive (got {a}, {b}, {c}, {d})")
        })?;
        require(p > 3.0, || format!("p must exceed 3, got {p}"))?;
        require(q > 3.0, || format!("q must exceed 3, got {q}"))?;
        require(r > 1.0, || format!("r must exceed 1, got {r}"))?;
        let bound = 2.0 * q / (q - 3.0);
        require(m > bound, || format!("m must exceed 2q/(q−3) = {bound}, got {m}"))?;
        Ok(EnergyModel::Ogden { a, b, c, d, p, q, r, m })
    }

    /// Requires `a, c, d > 0`, `p ≥ 2`, `r ≥ 1`, `m > 0`.
    pub fn ogden_2d(a: f64, c: f64, d: f64, p: f64, r: f64, m: f64) -> Result<Self, EnergyError> {
        finite(&[("a", a), ("c", c), ("d", d), ("p", p), ("r", r), ("m", m)])?;
        require(a > 0.0 && c > 0.0 && d > 0.0, || {
            format!("a, c, d must be positive (got {a}, {c}, {d})")
        })?;
        require(p >= 2.0, || format!("p must be at least 2, got {p}"))?;
        require(r >= 1.0, || format!("r must be at least 1, got {r}"))?;
        require(m > 0.0, || format!("m must be positive, got {m}"))?;
        Ok(EnergyModel::Ogden2d { a, c, d, p, r, m })
    }

    pub fn neo_trace(a: f64) -> Result<Self, EnergyError> {
        finite(&[("a", a)])?;
        require(a > 0.0, || format!("a must be positive, got {a}"))?;
        Ok(EnergyModel::NeoTrace { a })
    }

    pub fn saint_venant_kirchhoff(lambda: f64, mu: f64) -> Result<Self, EnergyError> {
        finite(&[("lambda", lambda), ("mu", mu)])?;
        require(lambda >= 0.0 && mu >= 0.0, || {
            format!("Lamé constants must be nonnegative, got λ = {lambda}, μ = {mu}")
        })?;
        Ok(EnergyModel::SaintVenantKirchhoff { lambda, mu })
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnergyModel::Ogden { .. } => "ogden",
            EnergyModel::Ogden2d { .. } => "ogden2d",
            EnergyModel::NeoTrace { .. } => "neotrace",
            EnergyModel::SaintVenantKirchhoff { .. } => "svk",
        }
    }

    /// Dimension the model was formulated for; used by the probes.
    pub fn natural_dim(&self) -> usize {
        match self {
            EnergyModel::Ogden2d { .. } => 2,
            _ => 3,
        }
    }

    pub fn has_convex_representative(&self) -> bool {
        !matches!(self, EnergyModel::SaintVenantKirchhoff { .. })
    }

    /// `W(F)` as an extended real.
    pub fn eval_w(&self, f: &SquareMatrix) -> f64 {
        match *self {
            EnergyModel::Ogden { a, b, c, d, p, q, r, m } => {
                let j = f.det();
                if j <= 0.0 {
                    return f64::INFINITY;
                }
                let s = singular_spectrum(f);
                let adj = adjugate_spectrum(&s);
                a * s.power_sum(p) + b * adj.iter().map(|x| x.powf(q)).sum::<f64>() + c * j.powf(r)
                    + d * j.powf(-m)
            }
            EnergyModel::Ogden2d { a, c, d, p, r, m } => {
                let j = f.det();
                if j <= 0.0 {
                    return f64::INFINITY;
                }
                a * f.frobenius().powf(p) + c * j.powf(r) + d * j.powf(-m)
            }
            EnergyModel::NeoTrace { a } => a * singular_spectrum(f).power_sum(3.0),
            EnergyModel::SaintVenantKirchhoff { lambda, mu } => {
                let n = f.dim();
                let e = (f.transpose() * *f - SquareMatrix::identity(n)).scale(0.5);
                let tr = e.trace();
                0.5 * lambda * tr * tr + mu * e.frobenius_sq()
            }
        }
    }

    /// `∂W/∂F`.
    pub fn grad_w(&self, f: &SquareMatrix) -> Result<SquareMatrix, EnergyError> {
        let n = f.dim();
        match *self {
            EnergyModel::Ogden { a, b, c, d, p, q, r, m } => {
                let j = f.det();
                if j <= 0.0 {
                    return Err(EnergyError::Degenerate(j));
                }
                let cmat = f.transpose() * *f;
                let t1 = (*f * sym_power(&cmat, p / 2.0 - 1.0)).scale(a * p);
                let adj = f.adjugate();
                let g_adj = (adj * sym_power(&(adj.transpose() * adj), q / 2.0 - 1.0)).scale(b * q);
                let t2 = f.adjugate_pullback(&g_adj);
                let vol = c * r * j.powf(r - 1.0) - d * m * j.powf(-m - 1.0);
                Ok(t1 + t2 + f.cofactor().scale(vol))
            }
            EnergyModel::Ogden2d { a, c, d, p, r, m } => {
                let j = f.det();
                if j <= 0.0 {
                    return Err(EnergyError::Degenerate(j));
                }
                let fn2 = f.frobenius_sq();
                let t1 = if fn2 == 0.0 { SquareMatrix::zero(n) } else { f.scale(a * p * fn2.powf(p / 2.0 - 1.0)) };
                let vol = c * r * j.powf(r - 1.0) - d * m * j.powf(-m - 1.0);
                Ok(t1 + f.cofactor().scale(vol))
            }
            EnergyModel::NeoTrace { a } => {
                let cmat = f.transpose() * *f;
                Ok((*f * sym_power(&cmat, 0.5)).scale(3.0 * a))
            }
            EnergyModel::SaintVenantKirchhoff { lambda, mu } => {
                let e = (f.transpose() * *f - SquareMatrix::identity(n)).scale(0.5);
                let s = SquareMatrix::identity(n).scale(lambda * e.trace()) + e.scale(2.0 * mu);
                Ok(*f * s)
            }
        }
    }

    /// Convex representative `G` evaluated on an arbitrary minor vector.
    ///
    /// Saint-Venant–Kirchhoff has none; for probing it is evaluated as
    /// `W` of the first-order block.
    pub fn eval_g(&self, mv: &MinorVector) -> Result<f64, EnergyError> {
        let delta = mv.determinant;
        if delta < 0.0 {
            return Err(EnergyError::OutsideDomain(delta));
        }
        let fm = mv.first_order_matrix();
        let barrier = |c: f64, d: f64, r: f64, m: f64| {
            if delta == 0.0 {
                f64::INFINITY
            } else {
                c * delta.powf(r) + d * delta.powf(-m)
            }
        };
        Ok(match *self {
            EnergyModel::Ogden { a, b, c, d, p, q, r, m } => {
                let am = mv.second_order_matrix();
                let adj_term = match am {
                    Some(am) => singular_spectrum(&am).power_sum(q),
                    // planar minor vectors carry no second-order block: adj F is a
                    // signed permutation of F and shares its singular values
                    None => singular_spectrum(&fm).power_sum(q),
                };
                a * singular_spectrum(&fm).power_sum(p) + b * adj_term + barrier(c, d, r, m)
            }
            EnergyModel::Ogden2d { a, c, d, p, r, m } => a * fm.frobenius().powf(p) + barrier(c, d, r, m),
            EnergyModel::NeoTrace { a } => a * singular_spectrum(&fm).power_sum(3.0),
            EnergyModel::SaintVenantKirchhoff { .. } => self.eval_w(&fm),
        })
    }
}

/// Ordered list of all minors of `F`: entries of `F`, entries of `adj F`
/// (3D only) and `det F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorVector {
    pub dim: usize,
    pub first_order: Vec<f64>,
    pub second_order: Vec<f64>,
    pub determinant: f64,
}

impl MinorVector {
    pub fn len(&self) -> usize {
        self.first_order.len() + self.second_order.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first_order_matrix(&self) -> SquareMatrix {
        let n = self.dim;
        SquareMatrix::from_fn(n, |i, j| self.first_order[i * n + j])
    }

    pub fn second_order_matrix(&self) -> Option<SquareMatrix> {
        if self.second_order.is_empty() {
            return None;
        }
        let n = self.dim;
        Some(SquareMatrix::from_fn(n, |i, j| self.second_order[i * n + j]))
    }

    /// `(1 − t)·self + t·other`, componentwise.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        MinorVector {
            dim: self.dim,
            first_order: mix(&self.first_order, &other.first_order),
            second_order: mix(&self.second_order, &other.second_order),
            determinant: (1.0 - t) * self.determinant + t * other.determinant,
        }
    }
}

pub fn minors(f: &SquareMatrix) -> MinorVector {
    MinorVector {
        dim: f.dim(),
        first_order: f.to_vec(),
        second_order: if f.dim() == 3 { f.adjugate().to_vec() } else { Vec::new() },
        determinant: f.det(),
    }
}

fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random matrix with entries in `[-spread, spread]` and `det ≥ min_det`.
pub fn random_positive_matrix<R: Rng>(rng: &mut R, dim: usize, spread: f64, min_det: f64) -> SquareMatrix {
    loop {
        let mut f = SquareMatrix::from_fn(dim, |_, _| rng.gen_range(-spread..=spread));
        let d = f.det();
        if d < 0.0 {
            for j in 0..dim {
                f.set(0, j, -f.get(0, j));
            }
        }
        if f.det() >= min_det {
            return f;
        }
    }
}

/// Uniformly distributed rotation.
pub fn random_rotation<R: Rng>(rng: &mut R, dim: usize) -> SquareMatrix {
    if dim == 2 {
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = th.sin_cos();
        return SquareMatrix::from_rows2([[c, -s], [s, c]]);
    }
    let (w, x, y, z) = loop {
        let v: [f64; 4] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n2: f64 = v.iter().map(|a| a * a).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            break (v[0] / n, v[1] / n, v[2] / n, v[3] / n);
        }
    };
    SquareMatrix::from_rows3([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

/// A convexity violation found by [`polyconvexity_probe`].
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityWitness {
    pub trial: usize,
    pub t: f64,
    pub f1: SquareMatrix,
    pub f2: SquareMatrix,
    /// `G((1−t)m₁ + t m₂)`
    pub interpolated: f64,
    /// `(1−t)G(m₁) + t G(m₂)`
    pub chord: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub model: &'static str,
    pub trials: usize,
    pub checked: usize,
    pub violations: usize,
    pub witnesses: Vec<ConvexityWitness>,
    pub passed: bool,
}

const MAX_WITNESSES: usize = 16;
const PROBE_DET_FLOOR: f64 = 1e-8;

/// Samples segments between minor vectors of random `F₁, F₂` with positive
/// determinant and checks the convexity inequality for `G` along them.
pub fn polyconvexity_probe(model: &EnergyModel, trials: usize, seed: u64) -> ProbeReport {
    let dim = model.natural_dim();
    let outcomes: Vec<Option<Option<ConvexityWitness>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let f1 = random_positive_matrix(&mut rng, dim, 1.5, 1e-3);
            let f2 = random_positive_matrix(&mut rng, dim, 1.5, 1e-3);
            let t: f64 = rng.gen_range(0.0..1.0);
            let t = if t == 0.0 { 0.5 } else { t };
            let (m1, m2) = (minors(&f1), minors(&f2));
            let mt = m1.lerp(&m2, t);
            if mt.determinant <= PROBE_DET_FLOOR {
                return None;
            }
            let g1 = model.eval_g(&m1).ok()?;
            let g2 = model.eval_g(&m2).ok()?;
            let gt = model.eval_g(&mt).ok()?;
            let chord = (1.0 - t) * g1 + t * g2;
            let tol = 1e-9 * (1.0 + g1.abs().max(g2.abs()).max(gt.abs()));
            if gt <= chord + tol {
                Some(None)
            } else {
                Some(Some(ConvexityWitness { trial, t, f1, f2, interpolated: gt, chord }))
            }
        })
        .collect();
    let checked = outcomes.iter().filter(|o| o.is_some()).count();
    let all: Vec<ConvexityWitness> = outcomes.into_iter().flatten().flatten().collect();
    let violations = all.len();
    ProbeReport {
        model: model.name(),
        trials,
        checked,
        violations,
        witnesses: all.into_iter().take(MAX_WITNESSES).collect(),
        passed: violations == 0,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoercivitySample {
    pub f: SquareMatrix,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    pub model: &'static str,
    pub samples: usize,
    /// Smallest observed `(W − barrier terms) / growth term` over the cloud.
    pub alpha_hat: f64,
    /// Smallest slack `W − α·growth` with `α` the theoretical constant when
    /// one is known, `alpha_hat` otherwise.
    pub g_hat: f64,
    pub theoretical_alpha: Option<f64>,
    /// Smallest ratio among the conformal samples `t·R`.
    pub conformal_alpha: f64,
    pub argmin: SquareMatrix,
    pub has_det_barrier: bool,
    pub violations: Vec<CoercivitySample>,
}

impl EnergyModel {
    /// `(W − cJʳ − dJ⁻ᵐ, growth term)` used by the coercivity estimate.
    fn coercivity_split(&self, f: &SquareMatrix) -> (f64, f64) {
        let w = self.eval_w(f);
        let n = f.dim() as i32;
        match *self {
            EnergyModel::Ogden { c, d, p, q, r, m, .. } => {
                let j = f.det();
                let growth = f.frobenius().powf(p) + f.adjugate().frobenius().powf(q);
                (w - c * j.powf(r) - d * j.powf(-m), growth)
            }
            EnergyModel::Ogden2d { c, d, p, r, m, .. } => {
                let j = f.det();
                (w - c * j.powf(r) - d * j.powf(-m), f.frobenius().powf(p))
            }
            _ => (w, f.frobenius().powi(n)),
        }
    }

    /// Closed-form coercivity constant from the power-mean inequality
    /// `Σσᵢᵖ ≥ n^{1−p/2} |F|ᵖ` (`p ≥ 2`).
    pub fn theoretical_alpha(&self) -> Option<f64> {
        let n = self.natural_dim() as f64;
        match *self {
            EnergyModel::Ogden { a, b, p, q, .. } => {
                Some((a * n.powf(1.0 - p / 2.0)).min(b * n.powf(1.0 - q / 2.0)))
            }
            EnergyModel::Ogden2d { a, .. } => Some(a),
            EnergyModel::NeoTrace { a } => Some(a * n.powf(-0.5)),
            EnergyModel::SaintVenantKirchhoff { .. } => None,
        }
    }

    /// Whether `W(εI) → ∞` as `ε → 0⁺`.
    pub fn has_det_barrier(&self) -> bool {
        let n = self.natural_dim();
        let w_ref = self.eval_w(&SquareMatrix::identity(n)).abs().max(1.0);
        let w_small = self.eval_w(&SquareMatrix::identity(n).scale(1e-8));
        w_small > 1e6 * w_ref
    }
}

/// Estimates the coercivity constant over a seeded sample cloud.
///
/// Every fourth sample is conformal (`t·R`, `R` a rotation), where the
/// power-mean bound is attained; the rest have random entries.
pub fn coercivity_margin(model: &EnergyModel, samples: usize, seed: u64) -> CoercivityReport {
    let dim = model.natural_dim();
    let theory = model.theoretical_alpha();
    let rows: Vec<(SquareMatrix, f64, f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let conformal = i % 4 == 0;
            let f = if conformal {
                let t = 10f64.powf(rng.gen_range(-1.0..1.0));
                random_rotation(&mut rng, dim).scale(t)
            } else {
                random_positive_matrix(&mut rng, dim, 3.0, 1e-4)
            };
            let (w, growth) = model.coercivity_split(&f);
            (f, w, growth, conformal)
        })
        .collect();
    let mut alpha_hat = f64::INFINITY;
    let mut conformal_alpha = f64::INFINITY;
    let mut argmin = SquareMatrix::identity(dim);
    for (f, w, growth, conformal) in &rows {
        let ratio = w / growth;
        if ratio < alpha_hat {
            alpha_hat = ratio;
            argmin = *f;
        }
        if *conformal {
            conformal_alpha = conformal_alpha.min(ratio);
        }
    }
    let alpha_ref = theory.unwrap_or(alpha_hat);
    let g_hat = rows
        .iter()
        .map(|(_, w, growth, _)| w - alpha_ref * growth)
        .fold(f64::INFINITY, f64::min);
    let violations = match theory {
        Some(alpha) => rows
            .iter()
            .filter(|(_, w, growth, _)| *w < alpha * growth - 1e-9 * (1.0 + w.abs()))
            .map(|(f, w, growth, _)| CoercivitySample { f: *f, ratio: w / growth })
            .collect(),
        None => Vec::new(),
    };
    CoercivityReport {
        model: model.name(),
        samples,
        alpha_hat,
        g_hat,
        theoretical_alpha: theory,
        conformal_alpha,
        argmin,
        has_det_barrier: model.has_det_barrier(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ogden() -> EnergyModel {
        EnergyModel::ogden(1.0, 0.5, 0.25, 0.75, 4.0, 4.0, 2.0, 9.0).unwrap()
    }

    #[test]
    fn values_at_identity() {
        let i3 = SquareMatrix::identity(3);
        assert_eq!(ogden().eval_w(&i3), 3.0 + 1.5 + 0.25 + 0.75);
        assert_eq!(EnergyModel::neo_trace(2.0).unwrap().eval_w(&i3), 6.0);
        let o2 = EnergyModel::ogden_2d(1.0, 1.0, 1.0, 4.0, 2.0, 2.0).unwrap();
        assert!((o2.eval_w(&SquareMatrix::identity(2)) - 6.0).abs() < 1e-14);
        let svk = EnergyModel::saint_venant_kirchhoff(1.0, 1.0).unwrap();
        assert_eq!(svk.eval_w(&i3), 0.0);
    }

    #[test]
    fn barrier_at_zero_determinant() {
        let f = SquareMatrix::diag(&[1.0, 2.0, 0.0]).unwrap();
        assert_eq!(ogden().eval_w(&f), f64::INFINITY);
        let inverted = SquareMatrix::diag(&[-1.0, 1.0, 1.0]).unwrap();
        assert_eq!(ogden().eval_w(&inverted), f64::INFINITY);
        assert!(matches!(ogden().grad_w(&f), Err(EnergyError::Degenerate(_))));
    }

    #[test]
    fn parameter_ranges_enforced() {
        assert!(EnergyModel::ogden(1.0, 1.0, 1.0, 1.0, 4.0, 4.0, 2.0, 8.0).is_err());
        assert!(EnergyModel::ogden(1.0, 1.0, 1.0, 1.0, 3.0, 4.0, 2.0, 9.0).is_err());
        assert!(EnergyModel::ogden(0.0, 1.0, 1.0, 1.0, 4.0, 4.0, 2.0, 9.0).is_err());
        assert!(EnergyModel::neo_trace(-1.0).is_err());
        assert!(EnergyModel::saint_venant_kirchhoff(-1.0, 1.0).is_err());
        assert!(EnergyModel::ogden_2d(1.0, 1.0, 1.0, 1.5, 2.0, 2.0).is_err());
    }

    #[test]
    fn neo_trace_gradient_at_identity() {
        let g = EnergyModel::neo_trace(1.0).unwrap().grad_w(&SquareMatrix::identity(3)).unwrap();
        assert!((g - SquareMatrix::identity(3).scale(3.0)).frobenius() < 1e-14);
    }

    #[test]
    fn ogden_gradient_is_isotropic_on_dilations() {
        let g = ogden().grad_w(&SquareMatrix::identity(3).scale(1.3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(g.get(i, j).abs() < 1e-13);
                }
            }
            assert!((g.get(i, i) - g.get(0, 0)).abs() < 1e-12 * g.get(0, 0).abs());
        }
    }

    #[test]
    fn minors_layout() {
        let mv = minors(&SquareMatrix::identity(2));
        assert_eq!(mv.first_order, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(mv.determinant, 1.0);
        assert_eq!(mv.len(), 5);
        let mv = minors(&SquareMatrix::identity(3));
        assert_eq!(mv.len(), 19);
        assert_eq!(mv.second_order, SquareMatrix::identity(3).to_vec());
        assert_eq!(minors(&SquareMatrix::diag(&[2.0, 3.0]).unwrap()).determinant, 6.0);
    }

    #[test]
    fn convex_representative_edges() {
        let mut mv = minors(&SquareMatrix::identity(3));
        mv.determinant = -0.1;
        assert!(matches!(ogden().eval_g(&mv), Err(EnergyError::OutsideDomain(_))));
        let mut mv = minors(&SquareMatrix::identity(3));
        mv.determinant = 1e-30;
        assert!(ogden().eval_g(&mv).unwrap() > 1e200);
        mv.determinant = 0.0;
        assert_eq!(ogden().eval_g(&mv).unwrap(), f64::INFINITY);
        let zero = minors(&SquareMatrix::zero(3));
        assert_eq!(EnergyModel::neo_trace(1.0).unwrap().eval_g(&zero).unwrap(), 0.0);
    }

    #[test]
    fn model_json_round_trip_and_validation() {
        let json = r#"{"kind":"ogden","a":1,"b":0.5,"c":0.25,"d":0.75,"p":4,"q":4,"r":2,"m":9}"#;
        let m: EnergyModel = serde_json::from_str(json).unwrap();
        assert_eq!(m, ogden());
        let back = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<EnergyModel>(&back).unwrap(), m);
        let bad = r#"{"kind":"ogden","a":1,"b":0.5,"c":0.25,"d":0.75,"p":4,"q":4,"r":2,"m":8}"#;
        assert!(serde_json::from_str::<EnergyModel>(bad).is_err());
        let unknown = r#"{"kind":"neotrace","a":1,"zeta":2}"#;
        assert!(serde_json::from_str::<EnergyModel>(unknown).is_err());
    }

    #[test]
    fn barrier_detection() {
        assert!(ogden().has_det_barrier());
        assert!(!EnergyModel::neo_trace(1.0).unwrap().has_det_barrier());
        let svk = EnergyModel::saint_venant_kirchhoff(1.0, 1.0).unwrap();
        assert!(!svk.has_det_barrier());
        // W(εI) → 9λ/8 + 3μ/4 as ε → 0
        let w = svk.eval_w(&SquareMatrix::identity(3).scale(1e-8));
        assert!((w - (9.0 / 8.0 + 0.75)).abs() < 1e-12);
    }

    #[test]
    fn probe_is_deterministic() {
        let m = EnergyModel::saint_venant_kirchhoff(1.0, 1.0).unwrap();
        let a = polyconvexity_probe(&m, 200, 9);
        let b = polyconvexity_probe(&m, 200, 9);
        assert_eq!(a.violations, b.violations);
        assert_eq!(a.checked, b.checked);
    }
}
