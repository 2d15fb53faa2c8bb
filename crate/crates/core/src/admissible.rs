//! Admissible deformation classes and clause-by-clause discrete membership.
//!
//! * `H(p, s, M)`: finite energy, `J ≥ 0`, finite distortion, `K_O ∈ L_p`,
//!   `‖K_I‖_{L_s} ≤ M`, prescribed boundary values.
//! * `A(s, M)`: as `H` without the outer-distortion clause.
//! * `Ball`: finite energy, `J > 0`, prescribed boundary values.
//!
//! Homeomorphy cannot be read off a discrete map; the caller may attach the
//! outcome of the injectivity diagnostics as an extra clause.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::EnergyModel;
use crate::exponents::{ball_s, ball_sigma, Exponent, ExponentError};
use crate::mesh::{
    discrete_energy, element_gradients, lebesgue_norm, Deformation, Mesh, MeshError,
};
use crate::numeric::ser_ext;
use crate::tensor::distortion;

#[derive(Debug, Error)]
pub enum AdmissibleError {
    #[error("invalid class parameter: {0}")]
    Parameter(String),
    #[error("classes are not comparable: {0}")]
    Incomparable(String),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassVariant {
    H,
    A,
    Ball,
}

/// Prescribed boundary values.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    /// `φ = id` on the boundary.
    Identity,
    /// Boundary images taken from a full deformation (interior entries ignored).
    Prescribed(Deformation),
}

impl BoundaryData {
    pub fn resolve(&self, mesh: &Mesh) -> Result<Deformation, MeshError> {
        match self {
            BoundaryData::Identity => Ok(Deformation::identity(mesh)),
            BoundaryData::Prescribed(d) => {
                d.check_against(mesh)?;
                Ok(d.clone())
            }
        }
    }
}

impl Serialize for BoundaryData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BoundaryData::Identity => s.serialize_str("identity"),
            BoundaryData::Prescribed(d) => {
                let v: serde_json::Value =
                    serde_json::from_str(&d.to_json_string()).map_err(serde::ser::Error::custom)?;
                v.serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for BoundaryData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::String(s) if s == "identity" => Ok(BoundaryData::Identity),
            serde_json::Value::Object(_) => Deformation::from_json_str(&v.to_string())
                .map(BoundaryData::Prescribed)
                .map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom("boundary must be \"identity\" or {\"images\": [...]}")),
        }
    }
}

/// Constraint tuple of an admissible class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassSpec", into = "ClassSpec")]
pub struct AdmissibleClass {
    pub variant: ClassVariant,
    /// `p` in `K_O ∈ L_p` (variant `H` only).
    pub outer_exponent: Option<Exponent>,
    /// `s` in `‖K_I‖_{L_s} ≤ M`.
    pub inner_exponent: Exponent,
    /// `M`.
    pub bound: f64,
    pub boundary: Option<BoundaryData>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassSpec {
    variant: ClassVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Exponent>,
    #[serde(default = "default_s")]
    s: Exponent,
    #[serde(rename = "M", default = "default_m")]
    bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<BoundaryData>,
}

fn default_s() -> Exponent {
    Exponent::int(1)
}

fn default_m() -> f64 {
    f64::MAX
}

impl TryFrom<ClassSpec> for AdmissibleClass {
    type Error = AdmissibleError;
    fn try_from(s: ClassSpec) -> Result<Self, AdmissibleError> {
        let class = AdmissibleClass {
            variant: s.variant,
            outer_exponent: s.p,
            inner_exponent: s.s,
            bound: s.bound,
            boundary: s.boundary,
        };
        class.validate()?;
        Ok(class)
    }
}

impl From<AdmissibleClass> for ClassSpec {
    fn from(c: AdmissibleClass) -> Self {
        ClassSpec { variant: c.variant, p: c.outer_exponent, s: c.inner_exponent, bound: c.bound, boundary: c.boundary }
    }
}

impl AdmissibleClass {
    pub fn h(p: Exponent, s: Exponent, bound: f64, boundary: Option<BoundaryData>) -> Result<Self, AdmissibleError> {
        let c = AdmissibleClass { variant: ClassVariant::H, outer_exponent: Some(p), inner_exponent: s, bound, boundary };
        c.validate()?;
        Ok(c)
    }

    pub fn a(s: Exponent, bound: f64, boundary: Option<BoundaryData>) -> Result<Self, AdmissibleError> {
        let c = AdmissibleClass { variant: ClassVariant::A, outer_exponent: None, inner_exponent: s, bound, boundary };
        c.validate()?;
        Ok(c)
    }

    pub fn ball(boundary: Option<BoundaryData>) -> Self {
        AdmissibleClass {
            variant: ClassVariant::Ball,
            outer_exponent: None,
            inner_exponent: Exponent::int(1),
            bound: f64::MAX,
            boundary,
        }
    }

    fn validate(&self) -> Result<(), AdmissibleError> {
        let one = Exponent::int(1);
        if self.variant == ClassVariant::H {
            match self.outer_exponent {
                Some(p) if p >= one => {}
                Some(p) => return Err(AdmissibleError::Parameter(format!("p must be at least 1, got {p}"))),
                None => return Err(AdmissibleError::Parameter("class H requires the outer exponent p".into())),
            }
        } else if self.outer_exponent.is_some() && self.variant == ClassVariant::A {
            return Err(AdmissibleError::Parameter("class A has no outer-distortion exponent".into()));
        }
        if self.inner_exponent < one {
            return Err(AdmissibleError::Parameter(format!("s must be at least 1, got {}", self.inner_exponent)));
        }
        if !(self.bound > 0.0) {
            return Err(AdmissibleError::Parameter(format!("M must be positive, got {}", self.bound)));
        }
        Ok(())
    }

    /// Whether the parameters meet the existence hypotheses in dimension `n`:
    /// `p = n − 1` and `s > 1` for `H`, `s > 1` for `A`.
    pub fn hypotheses_hold(&self, n: usize) -> bool {
        let one = Exponent::int(1);
        match self.variant {
            ClassVariant::H => self.outer_exponent == Some(Exponent::int(n as i128 - 1)) && self.inner_exponent > one,
            ClassVariant::A => self.inner_exponent > one,
            ClassVariant::Ball => true,
        }
    }

    /// Outer exponent used for reporting: `p` for `H`, `n − 1` otherwise.
    pub fn reporting_outer_exponent(&self, n: usize) -> f64 {
        self.outer_exponent.map(|p| p.to_f64()).unwrap_or((n - 1) as f64).max(1.0)
    }

    pub fn has_inner_bound(&self) -> bool {
        self.variant != ClassVariant::Ball
    }
}

/// Discretization tolerances for the membership clauses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipTolerances {
    /// `|F_T| ≤ eps_fd` required on elements with vanishing Jacobian.
    pub eps_fd: f64,
    /// Max-norm tolerance for boundary values.
    pub eps_bd: f64,
    /// Elements with `|J_T| ≤ eps_zero` are treated as `J = 0`.
    pub eps_zero: f64,
}

impl MembershipTolerances {
    pub fn for_mesh(mesh: &Mesh) -> Self {
        let h = mesh.diameter();
        MembershipTolerances {
            eps_fd: 1e-10 * h,
            eps_bd: 1e-9 * h,
            eps_zero: 1e-12 * h.powi(mesh.dim() as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub variant: ClassVariant,
    pub finite_distortion: bool,
    pub jacobian_nonneg: bool,
    pub jacobian_positive: bool,
    #[serde(serialize_with = "ser_ext")]
    pub outer_norm: f64,
    #[serde(serialize_with = "ser_ext")]
    pub inner_norm: f64,
    pub inner_within_bound: bool,
    #[serde(serialize_with = "ser_ext")]
    pub energy: f64,
    pub energy_finite: bool,
    pub boundary_match: bool,
    /// Attached by the caller from the injectivity diagnostics.
    pub injective: Option<bool>,
    pub hypotheses_hold: bool,
    pub overall: bool,
    pub failed: Vec<String>,
}

impl MembershipVerdict {
    /// Attaches the non-overlap verdict as an additional clause.
    pub fn with_injectivity(mut self, injective: bool) -> Self {
        self.injective = Some(injective);
        self.recompute();
        self
    }

    fn recompute(&mut self) {
        let mut failed = Vec::new();
        let mut check = |ok: bool, name: &str| {
            if !ok {
                failed.push(name.to_string());
            }
        };
        check(self.energy_finite, "energy_finite");
        match self.variant {
            ClassVariant::Ball => {
                check(self.jacobian_positive, "jacobian_positive");
            }
            ClassVariant::H | ClassVariant::A => {
                check(self.jacobian_nonneg, "jacobian_nonneg");
                check(self.finite_distortion, "finite_distortion");
                if self.variant == ClassVariant::H {
                    check(self.outer_norm.is_finite(), "outer_norm");
                }
                check(self.inner_within_bound, "inner_within_bound");
            }
        }
        check(self.boundary_match, "boundary_match");
        if let Some(inj) = self.injective {
            check(inj, "injective");
        }
        self.overall = failed.is_empty();
        self.failed = failed;
    }
}

/// Membership with tolerances scaled to the mesh.
pub fn membership(
    mesh: &Mesh,
    phi: &Deformation,
    model: &EnergyModel,
    class: &AdmissibleClass,
) -> Result<MembershipVerdict, AdmissibleError> {
    membership_with(mesh, phi, model, class, &MembershipTolerances::for_mesh(mesh))
}

pub fn membership_with(
    mesh: &Mesh,
    phi: &Deformation,
    model: &EnergyModel,
    class: &AdmissibleClass,
    tol: &MembershipTolerances,
) -> Result<MembershipVerdict, AdmissibleError> {
    phi.check_against(mesh)?;
    let n = mesh.dim();
    let grads = element_gradients(mesh, phi);
    let mut finite_distortion = true;
    let mut jacobian_nonneg = true;
    let mut jacobian_positive = true;
    let mut outer = Vec::with_capacity(grads.len());
    let mut inner = Vec::with_capacity(grads.len());
    for f in &grads {
        let d = distortion(f);
        let j = d.jacobian;
        if j < 0.0 {
            jacobian_nonneg = false;
        }
        if j <= 0.0 {
            jacobian_positive = false;
        }
        if j.abs() <= tol.eps_zero && f.frobenius() > tol.eps_fd {
            finite_distortion = false;
        }
        outer.push(d.outer.unwrap_or(f64::INFINITY));
        inner.push(d.inner.unwrap_or(f64::INFINITY));
    }
    let p = class.reporting_outer_exponent(n);
    let s = class.inner_exponent.to_f64();
    let outer_norm = lebesgue_norm(mesh.volumes(), &outer, p);
    let inner_norm = lebesgue_norm(mesh.volumes(), &inner, s);
    let energy = discrete_energy(mesh, phi, model);
    let boundary_match = match &class.boundary {
        None => true,
        Some(b) => {
            let target = b.resolve(mesh)?;
            mesh.boundary_vertices().iter().all(|&v| {
                (0..n).all(|i| (phi.image(v)[i] - target.image(v)[i]).abs() <= tol.eps_bd)
            })
        }
    };
    let mut verdict = MembershipVerdict {
        variant: class.variant,
        finite_distortion,
        jacobian_nonneg,
        jacobian_positive,
        outer_norm,
        inner_norm,
        inner_within_bound: !class.has_inner_bound() || inner_norm <= class.bound,
        energy,
        energy_finite: energy.is_finite(),
        boundary_match,
        injective: None,
        hypotheses_hold: class.hypotheses_hold(n),
        overall: false,
        failed: Vec::new(),
    };
    verdict.recompute();
    Ok(verdict)
}

/// Whether `c2 ⊆ c1` follows from Hölder's inequality on a domain of volume
/// `domain_volume`: `s₁ ≤ s₂` and `M₂ |Ω|^{1/s₁ − 1/s₂} ≤ M₁`.
pub fn embedding_check(
    c1: &AdmissibleClass,
    c2: &AdmissibleClass,
    domain_volume: f64,
) -> Result<bool, AdmissibleError> {
    if c1.variant != c2.variant {
        return Err(AdmissibleError::Incomparable(format!("variants {:?} and {:?} differ", c1.variant, c2.variant)));
    }
    if c1.outer_exponent != c2.outer_exponent {
        return Err(AdmissibleError::Incomparable("outer exponents differ".into()));
    }
    let (s1, s2) = (c1.inner_exponent, c2.inner_exponent);
    if s1 > s2 {
        return Ok(false);
    }
    let gap = s1.recip()?.sub(&s2.recip()?)?.to_f64();
    Ok(c2.bound * domain_volume.powf(gap) <= c1.bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallExponents {
    pub sigma: Exponent,
    pub s: Exponent,
}

/// Exponents `σ` and `s` through which a Ball-class member with Ogden-type
/// coercivity lands in `A(s, M)`.
pub fn ball_class_exponents(q: Exponent, m: Exponent, r: Exponent, n: u32) -> Result<BallExponents, AdmissibleError> {
    let sigma = ball_sigma(q, m)?;
    let s = ball_s(sigma, r, n)?;
    Ok(BallExponents { sigma, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_grid, Rect};

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    fn model() -> EnergyModel {
        EnergyModel::ogden_2d(1.0, 1.0, 1.0, 4.0, 2.0, 2.0).unwrap()
    }

    #[test]
    fn identity_is_member() {
        let m = make_grid(4, 4, Rect::UNIT);
        let class = AdmissibleClass::h(e("1"), e("2"), 10.0, Some(BoundaryData::Identity)).unwrap();
        let v = membership(&m, &Deformation::identity(&m), &model(), &class).unwrap();
        assert!(v.overall, "{:?}", v.failed);
        assert!((v.inner_norm - 2.0).abs() < 1e-12);
        assert!(v.hypotheses_hold);
    }

    #[test]
    fn tight_bound_fails_only_that_clause() {
        let m = make_grid(4, 4, Rect::UNIT);
        let class = AdmissibleClass::h(e("1"), e("2"), 1.0, Some(BoundaryData::Identity)).unwrap();
        let v = membership(&m, &Deformation::identity(&m), &model(), &class).unwrap();
        assert!(!v.inner_within_bound);
        assert_eq!(v.failed, vec!["inner_within_bound".to_string()]);
    }

    #[test]
    fn inverted_element_fails_sign_clause() {
        let m = make_grid(2, 2, Rect::UNIT);
        let mut phi = Deformation::identity(&m);
        phi.images_mut()[4] = [3.0, 3.0, 0.0];
        let class = AdmissibleClass::a(e("2"), 1e9, None).unwrap();
        let v = membership(&m, &phi, &EnergyModel::neo_trace(1.0).unwrap(), &class).unwrap();
        assert!(!v.jacobian_nonneg);
        assert!(!v.overall);
        assert!(v.failed.contains(&"jacobian_nonneg".to_string()));
    }

    #[test]
    fn boundary_mismatch_detected() {
        let m = make_grid(2, 2, Rect::UNIT);
        let phi = Deformation::from_map(&m, |p| [1.1 * p[0], p[1], 0.0]);
        let class = AdmissibleClass::ball(Some(BoundaryData::Identity));
        let v = membership(&m, &phi, &model(), &class).unwrap();
        assert_eq!(v.failed, vec!["boundary_match".to_string()]);
    }

    #[test]
    fn injectivity_clause_is_wired() {
        let m = make_grid(2, 2, Rect::UNIT);
        let class = AdmissibleClass::ball(None);
        let v = membership(&m, &Deformation::identity(&m), &model(), &class).unwrap();
        assert!(v.overall);
        let v = v.with_injectivity(false);
        assert_eq!(v.failed, vec!["injective".to_string()]);
    }

    #[test]
    fn embedding_cases() {
        let c = |s: &str, m: f64| AdmissibleClass::a(e(s), m, None).unwrap();
        assert!(embedding_check(&c("1", 5.0), &c("2", 5.0), 1.0).unwrap());
        assert!(!embedding_check(&c("1", 9.0), &c("2", 5.0), 4.0).unwrap());
        assert!(embedding_check(&c("3/2", 7.0), &c("3/2", 7.0), 3.0).unwrap());
        assert!(!embedding_check(&c("2", 100.0), &c("1", 1.0), 1.0).unwrap());
        let h = AdmissibleClass::h(e("1"), e("2"), 5.0, None).unwrap();
        assert!(embedding_check(&h, &c("2", 5.0), 1.0).is_err());
    }

    #[test]
    fn ball_exponent_bridge() {
        let b = ball_class_exponents(e("4"), e("9"), e("2"), 3).unwrap();
        assert_eq!((b.sigma, b.s), (e("40/13"), e("80/79")));
        let b = ball_class_exponents(e("6"), e("6"), e("2"), 3).unwrap();
        assert_eq!((b.sigma, b.s), (e("7/2"), e("14/13")));
        assert!(ball_class_exponents(e("4"), e("8"), e("2"), 3).is_err());
    }

    #[test]
    fn class_json() {
        let c: AdmissibleClass = serde_json::from_str(r#"{"variant":"H","p":1,"s":"2","M":10,"boundary":"identity"}"#).unwrap();
        assert_eq!(c.outer_exponent, Some(e("1")));
        assert_eq!(c.boundary, Some(BoundaryData::Identity));
        assert!(serde_json::from_str::<AdmissibleClass>(r#"{"variant":"H","s":2,"M":10}"#).is_err());
        assert!(serde_json::from_str::<AdmissibleClass>(r#"{"variant":"A","s":2,"M":-1}"#).is_err());
        assert!(serde_json::from_str::<AdmissibleClass>(r#"{"variant":"A","s":2,"M":1,"bogus":0}"#).is_err());
    }
}
