//! Feasible gradient descent on the discrete energy over an admissible class.
//!
//! The objective is `E(φ) + μ·max(0, ‖K_I‖_s − M)²`. Trial steps that make
//! some element Jacobian drop to `det_floor` or below are rejected outright,
//! the remaining ones must pass the Armijo test with strict decrease. When a
//! stage with fixed `μ` becomes stationary while the inner-distortion bound
//! is still violated, `μ` grows geometrically and descent resumes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admissible::{AdmissibleClass, MembershipTolerances};
use crate::energy::{EnergyError, EnergyModel};
use crate::injectivity::ciarlet_necas;
use crate::mesh::{
    discrete_energy, distortion_norm, gradient_of, DistortionKind, Deformation, Mesh, MeshError, Point,
};
use crate::numeric::{pairwise_sum, ser_ext};
use crate::sequences::TestFunction;
use crate::tensor::{distortion, inner_distortion_gradient};

#[derive(Debug, Error)]
pub enum MinimizeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("infeasible initial deformation: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Solver settings; ranges are enforced by [`MinimizeConfig::validate`] and on
/// deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct MinimizeConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Smallest trial step before the line search gives up.
    pub min_step: f64,
    pub penalty_mu: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    /// Slack on `‖K_I‖_s ≤ M` accepted at the end of a penalty stage.
    pub constraint_tol: f64,
    /// Hard lower bound on element Jacobians; `None` means `1e-10·diam^n`.
    pub det_floor: Option<f64>,
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    max_iters: usize,
    grad_tol: f64,
    armijo_c: f64,
    backtrack_factor: f64,
    min_step: f64,
    penalty_mu: f64,
    penalty_growth: f64,
    penalty_max: f64,
    constraint_tol: f64,
    det_floor: Option<f64>,
    seed: u64,
}

impl Default for RawConfig {
    fn default() -> Self {
        let c = MinimizeConfig::default();
        RawConfig {
            max_iters: c.max_iters,
            grad_tol: c.grad_tol,
            armijo_c: c.armijo_c,
            backtrack_factor: c.backtrack_factor,
            min_step: c.min_step,
            penalty_mu: c.penalty_mu,
            penalty_growth: c.penalty_growth,
            penalty_max: c.penalty_max,
            constraint_tol: c.constraint_tol,
            det_floor: c.det_floor,
            seed: c.seed,
        }
    }
}

impl TryFrom<RawConfig> for MinimizeConfig {
    type Error = MinimizeError;
    fn try_from(r: RawConfig) -> Result<Self, MinimizeError> {
        let c = MinimizeConfig {
            max_iters: r.max_iters,
            grad_tol: r.grad_tol,
            armijo_c: r.armijo_c,
            backtrack_factor: r.backtrack_factor,
            min_step: r.min_step,
            penalty_mu: r.penalty_mu,
            penalty_growth: r.penalty_growth,
            penalty_max: r.penalty_max,
            constraint_tol: r.constraint_tol,
            det_floor: r.det_floor,
            seed: r.seed,
        };
        c.validate()?;
        Ok(c)
    }
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            max_iters: 20_000,
            grad_tol: 1e-7,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            min_step: 1e-20,
            penalty_mu: 1.0,
            penalty_growth: 10.0,
            penalty_max: 1e8,
            constraint_tol: 1e-6,
            det_floor: None,
            seed: 0,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<(), MinimizeError> {
        let bad = |m: String| Err(MinimizeError::Config(m));
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return bad(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad(format!("armijo_c must lie in (0, 1), got {}", self.armijo_c));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad(format!("backtrack_factor must lie in (0, 1), got {}", self.backtrack_factor));
        }
        if !(self.min_step > 0.0) {
            return bad(format!("min_step must be positive, got {}", self.min_step));
        }
        if !(self.penalty_mu >= 0.0 && self.penalty_mu.is_finite()) {
            return bad(format!("penalty_mu must be non-negative, got {}", self.penalty_mu));
        }
        if !(self.penalty_growth > 1.0 && self.penalty_growth.is_finite()) {
            return bad(format!("penalty_growth must exceed 1, got {}", self.penalty_growth));
        }
        if !(self.penalty_max >= self.penalty_mu && self.penalty_max.is_finite()) {
            return bad(format!("penalty_max must be finite and at least penalty_mu, got {}", self.penalty_max));
        }
        if !(self.constraint_tol >= 0.0) {
            return bad(format!("constraint_tol must be non-negative, got {}", self.constraint_tol));
        }
        if let Some(f) = self.det_floor {
            if !(f > 0.0 && f.is_finite()) {
                return bad(format!("det_floor must be positive, got {f}"));
            }
        }
        Ok(())
    }

    pub fn det_floor_for(&self, mesh: &Mesh) -> f64 {
        self.det_floor.unwrap_or_else(|| 1e-10 * mesh.diameter().powi(mesh.dim() as i32))
    }
}

fn inner_bound(class: &AdmissibleClass) -> Option<(f64, f64)> {
    class.has_inner_bound().then(|| (class.inner_exponent.to_f64(), class.bound))
}

/// `E(φ) + μ·max(0, ‖K_I‖_s − M)²` as an extended real.
pub fn objective(mesh: &Mesh, phi: &Deformation, model: &EnergyModel, class: &AdmissibleClass, mu: f64) -> f64 {
    let energy = discrete_energy(mesh, phi, model);
    energy + penalty(mesh, phi, class, mu)
}

fn penalty(mesh: &Mesh, phi: &Deformation, class: &AdmissibleClass, mu: f64) -> f64 {
    match inner_bound(class) {
        Some((s, m)) if mu > 0.0 => {
            let excess = (distortion_norm(mesh, phi, DistortionKind::Inner, s) - m).max(0.0);
            mu * excess * excess
        }
        _ => 0.0,
    }
}

fn has_dirichlet(class: &AdmissibleClass) -> bool {
    class.boundary.is_some()
}

/// Exact gradient of [`objective`] with respect to the vertex images;
/// boundary rows are zero when the class prescribes boundary values.
pub fn gradient(
    mesh: &Mesh,
    phi: &Deformation,
    model: &EnergyModel,
    class: &AdmissibleClass,
    mu: f64,
) -> Result<Vec<Point>, MinimizeError> {
    phi.check_against(mesh)?;
    let n = mesh.dim();
    let grads: Vec<_> = (0..mesh.simplex_count()).into_par_iter().map(|t| gradient_of(mesh, phi.images(), t)).collect();

    // penalty weight per element: d/dK_T of μ·(N − M)², N = (Σ vol K^s)^{1/s}
    let weights: Option<Vec<f64>> = match inner_bound(class) {
        Some((s, m)) if mu > 0.0 => {
            let k: Vec<f64> = grads.iter().map(|f| distortion(f).inner.unwrap_or(f64::INFINITY)).collect();
            let terms: Vec<f64> = mesh.volumes().iter().zip(&k).map(|(v, k)| v * k.powf(s)).collect();
            let norm = pairwise_sum(&terms).powf(1.0 / s);
            if norm > m {
                let outer = 2.0 * mu * (norm - m) * norm.powf(1.0 - s);
                Some(mesh.volumes().iter().zip(&k).map(|(v, k)| outer * v * k.powf(s - 1.0)).collect())
            } else {
                None
            }
        }
        _ => None,
    };

    let local: Vec<Result<crate::tensor::SquareMatrix, MinimizeError>> = (0..mesh.simplex_count())
        .into_par_iter()
        .map(|t| {
            let f = &grads[t];
            let mut p = model.grad_w(f)?.scale(mesh.volume(t));
            if let Some(w) = &weights {
                p = p + inner_distortion_gradient(f).scale(w[t]);
            }
            // ∂/∂(edge matrix) = P·D_m⁻ᵀ
            Ok(p * mesh.reference_inverse(t).transpose())
        })
        .collect();

    let mut out = vec![[0.0; 3]; mesh.vertex_count()];
    for (t, h) in local.into_iter().enumerate() {
        let h = h?;
        let s = mesh.simplex(t);
        for k in 0..n {
            for i in 0..n {
                let v = h.get(i, k);
                out[s[k + 1]][i] += v;
                out[s[0]][i] -= v;
            }
        }
    }
    if has_dirichlet(class) {
        for &b in mesh.boundary_vertices() {
            out[b] = [0.0; 3];
        }
    }
    Ok(out)
}

fn norm(g: &[Point], n: usize) -> f64 {
    let sq: Vec<f64> = g.iter().map(|p| p[..n].iter().map(|x| x * x).sum()).collect();
    pairwise_sum(&sq).sqrt()
}

fn dot(a: &[Point], b: &[Point], n: usize) -> f64 {
    let terms: Vec<f64> = a.iter().zip(b).map(|(p, q)| (0..n).map(|i| p[i] * q[i]).sum()).collect();
    pairwise_sum(&terms)
}

fn min_jacobian(mesh: &Mesh, phi: &Deformation) -> f64 {
    crate::mesh::element_jacobians(mesh, phi).into_iter().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The initial deformation already satisfied every stopping test.
    Stationary,
    Converged,
    MaxIterations,
    StepCollapse,
    /// `μ` reached `penalty_max` with the inner-distortion bound violated.
    PenaltyExhausted,
}

/// One row per accepted iterate (row 0 is the initial state).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    #[serde(serialize_with = "ser_ext")]
    pub energy: f64,
    #[serde(serialize_with = "ser_ext")]
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
    #[serde(rename = "kI_norm", serialize_with = "ser_ext")]
    pub k_inner_norm: f64,
    #[serde(rename = "kO_norm", serialize_with = "ser_ext")]
    pub k_outer_norm: f64,
    #[serde(rename = "min_J")]
    pub min_jacobian: f64,
    /// `∫J − |φ(Ω)|` with a coarse raster (`diam/256` in 2D, `diam/32` in 3D).
    #[serde(serialize_with = "ser_ext")]
    pub cn_gap: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeReport {
    pub rows: Vec<IterationRecord>,
    pub termination: Termination,
    pub det_floor: f64,
}

impl MinimizeReport {
    pub fn accepted_steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn last(&self) -> &IterationRecord {
        self.rows.last().expect("report always holds the initial row")
    }

    /// Objective never increases between consecutive rows with equal `μ`.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].mu != w[1].mu || w[1].objective <= w[0].objective)
    }
}

fn record(
    mesh: &Mesh,
    phi: &Deformation,
    model: &EnergyModel,
    class: &AdmissibleClass,
    mu: f64,
    iter: usize,
    grad_norm: f64,
    step: f64,
) -> IterationRecord {
    let n = mesh.dim();
    let energy = discrete_energy(mesh, phi, model);
    let s = class.inner_exponent.to_f64();
    let res = mesh.diameter() / if n == 2 { 256.0 } else { 32.0 };
    let cn_gap = match ciarlet_necas(mesh, phi, Some(res)) {
        Ok(r) => r.sum_image_volume - r.union_volume,
        Err(_) => f64::NAN,
    };
    IterationRecord {
        iter,
        energy,
        objective: energy + penalty(mesh, phi, class, mu),
        grad_norm,
        step,
        k_inner_norm: distortion_norm(mesh, phi, DistortionKind::Inner, s),
        k_outer_norm: distortion_norm(mesh, phi, DistortionKind::Outer, class.reporting_outer_exponent(n)),
        min_jacobian: min_jacobian(mesh, phi),
        cn_gap,
        mu,
    }
}

/// Pins boundary vertices to the class's boundary data (within the
/// membership tolerance) and checks feasibility of the start.
fn prepare_start(
    mesh: &Mesh,
    model: &EnergyModel,
    class: &AdmissibleClass,
    phi: &Deformation,
    floor: f64,
) -> Result<Deformation, MinimizeError> {
    phi.check_against(mesh)?;
    let mut phi = phi.clone();
    if let Some(b) = &class.boundary {
        let target = b.resolve(mesh)?;
        let tol = MembershipTolerances::for_mesh(mesh).eps_bd;
        for &v in mesh.boundary_vertices() {
            let off = (0..mesh.dim()).map(|i| (phi.image(v)[i] - target.image(v)[i]).abs()).fold(0.0, f64::max);
            if off > tol {
                return Err(MinimizeError::Infeasible(format!(
                    "boundary vertex {v} is {off:e} away from the prescribed value"
                )));
            }
            phi.images_mut()[v] = *target.image(v);
        }
    }
    let min_j = min_jacobian(mesh, &phi);
    if !(min_j > floor) {
        return Err(MinimizeError::Infeasible(format!("minimum element Jacobian {min_j:e} is not above det_floor {floor:e}")));
    }
    let e = discrete_energy(mesh, &phi, model);
    if !e.is_finite() {
        return Err(MinimizeError::Infeasible("initial energy is not finite".into()));
    }
    Ok(phi)
}

fn axpy(phi: &Deformation, t: f64, g: &[Point], n: usize) -> Deformation {
    let mut out = phi.clone();
    for (p, d) in out.images_mut().iter_mut().zip(g) {
        for i in 0..n {
            p[i] -= t * d[i];
        }
    }
    out
}

pub fn minimize(
    mesh: &Mesh,
    model: &EnergyModel,
    class: &AdmissibleClass,
    phi_init: &Deformation,
    config: &MinimizeConfig,
) -> Result<(Deformation, MinimizeReport), MinimizeError> {
    minimize_with_observer(mesh, model, class, phi_init, config, |_, _| {})
}

/// [`minimize`], calling `observer` on the initial state and after every
/// accepted step.
pub fn minimize_with_observer(
    mesh: &Mesh,
    model: &EnergyModel,
    class: &AdmissibleClass,
    phi_init: &Deformation,
    config: &MinimizeConfig,
    mut observer: impl FnMut(&IterationRecord, &Deformation),
) -> Result<(Deformation, MinimizeReport), MinimizeError> {
    config.validate()?;
    let n = mesh.dim();
    let floor = config.det_floor_for(mesh);
    let mut phi = prepare_start(mesh, model, class, phi_init, floor)?;
    let constrained = inner_bound(class).is_some();
    let mut mu = if constrained { config.penalty_mu } else { 0.0 };

    let mut g = gradient(mesh, &phi, model, class, mu)?;
    let mut gnorm = norm(&g, n);
    let mut obj = objective(mesh, &phi, model, class, mu);
    let first = record(mesh, &phi, model, class, mu, 0, gnorm, 0.0);
    observer(&first, &phi);
    let mut rows = vec![first];

    let mut iter = 0usize;
    let mut trial = 1.0 / gnorm.max(1e-300);
    let mut prev: Option<(Vec<Point>, Vec<Point>)> = None;
    let mut collapsed = false;
    let termination = loop {
        // a stage ends at a stationary point or when no trial step can be
        // told apart from rounding; only then is μ raised
        let stage_end = if gnorm < config.grad_tol {
            Some(if iter == 0 { Termination::Stationary } else { Termination::Converged })
        } else if collapsed {
            Some(Termination::StepCollapse)
        } else {
            None
        };
        if let Some(reason) = stage_end {
            let violated = constrained && rows.last().unwrap().k_inner_norm > class.bound + config.constraint_tol;
            if !violated {
                break reason;
            }
            collapsed = false;
            if mu == 0.0 {
                mu = 1.0;
            } else if mu >= config.penalty_max {
                break Termination::PenaltyExhausted;
            } else {
                mu = (mu * config.penalty_growth).min(config.penalty_max);
            }
            g = gradient(mesh, &phi, model, class, mu)?;
            gnorm = norm(&g, n);
            obj = objective(mesh, &phi, model, class, mu);
            trial = 1.0 / gnorm.max(1e-300);
            prev = None;
            continue;
        }
        if iter >= config.max_iters {
            break Termination::MaxIterations;
        }
        // Barzilai–Borwein guess for the first trial step, when available
        if let Some((dx, dg)) = &prev {
            let sy = dot(dx, dg, n);
            if sy > 0.0 {
                let bb = dot(dx, dx, n) / sy;
                if bb.is_finite() && bb > 0.0 {
                    trial = bb;
                }
            }
        }
        let g2 = gnorm * gnorm;
        let mut t = trial;
        let accepted = loop {
            if t < config.min_step {
                break None;
            }
            let cand = axpy(&phi, t, &g, n);
            if min_jacobian(mesh, &cand) > floor {
                let o = objective(mesh, &cand, model, class, mu);
                if o < obj && o <= obj - config.armijo_c * t * g2 {
                    break Some((cand, o));
                }
            }
            t *= config.backtrack_factor;
        };
        let Some((cand, o)) = accepted else {
            collapsed = true;
            continue;
        };
        let g_new = gradient(mesh, &cand, model, class, mu)?;
        let dx: Vec<Point> = g.iter().map(|d| [-t * d[0], -t * d[1], -t * d[2]]).collect();
        let dg: Vec<Point> = g_new.iter().zip(&g).map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]]).collect();
        prev = Some((dx, dg));
        trial = 2.0 * t;
        phi = cand;
        obj = o;
        g = g_new;
        gnorm = norm(&g, n);
        iter += 1;
        let row = record(mesh, &phi, model, class, mu, iter, gnorm, t);
        observer(&row, &phi);
        rows.push(row);
    };
    Ok((phi, MinimizeReport { rows, termination, det_floor: floor }))
}

/// `Σ_T vol(T)·θ(c_T)·J_T` with `c_T` the element centroid.
pub fn theta_jacobian(mesh: &Mesh, phi: &Deformation, theta: &TestFunction) -> f64 {
    let n = mesh.dim();
    let terms: Vec<f64> = (0..mesh.simplex_count())
        .map(|t| {
            let c = mesh.centroid(t);
            let th = theta.eval(&c[..n]);
            if th == 0.0 {
                0.0
            } else {
                mesh.volume(t) * th * gradient_of(mesh, phi.images(), t).det()
            }
        })
        .collect();
    pairwise_sum(&terms)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub iter: usize,
    pub objective: f64,
    pub theta_jacobian: f64,
    #[serde(skip)]
    pub deformation: Deformation,
}

/// Snapshots along a descent run at iterations `0, 1, 2, 4, 8, …` (at most
/// `snapshots − 1` of them) plus the final iterate.
pub fn minimizing_sequence(
    mesh: &Mesh,
    model: &EnergyModel,
    class: &AdmissibleClass,
    phi_init: &Deformation,
    config: &MinimizeConfig,
    snapshots: usize,
    theta: &TestFunction,
) -> Result<(Vec<Snapshot>, MinimizeReport), MinimizeError> {
    if snapshots == 0 {
        return Err(MinimizeError::Config("at least one snapshot is required".into()));
    }
    let mut taken: Vec<Snapshot> = Vec::new();
    let mut last: Option<Snapshot> = None;
    let (_, report) = minimize_with_observer(mesh, model, class, phi_init, config, |row, phi| {
        let snap = Snapshot {
            iter: row.iter,
            objective: row.objective,
            theta_jacobian: theta_jacobian(mesh, phi, theta),
            deformation: phi.clone(),
        };
        let scheduled = row.iter == 0 || row.iter.is_power_of_two();
        if scheduled && taken.len() + 1 < snapshots {
            taken.push(snap.clone());
        }
        last = Some(snap);
    })?;
    let last = last.expect("observer sees the initial state");
    if taken.last().map(|s| s.iter) != Some(last.iter) {
        taken.push(last);
    }
    Ok((taken, report))
}

/// Identity plus a seeded interior perturbation of size `amplitude`
/// (uniform in each coordinate); boundary vertices stay fixed.
pub fn perturbed_identity(mesh: &Mesh, amplitude: f64, seed: u64) -> Deformation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.dim();
    let mut phi = Deformation::identity(mesh);
    for v in 0..mesh.vertex_count() {
        let mut d = [0.0; 3];
        for x in d.iter_mut().take(n) {
            *x = rng.gen_range(-amplitude..=amplitude);
        }
        if !mesh.is_boundary(v) {
            for i in 0..n {
                phi.images_mut()[v][i] += d[i];
            }
        }
    }
    phi
}
