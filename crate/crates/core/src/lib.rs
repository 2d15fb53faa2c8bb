//! Simplicial hyperelasticity over deformation classes with integrable
//! distortion.
//!
//! The crate minimizes polyconvex stored energies over piecewise-affine
//! deformations of triangle and tetrahedral meshes, keeps every iterate
//! orientation preserving, and audits the result against the outer/inner
//! distortion bounds, the Ciarlet–Nečas non-interpenetration inequality and
//! strict Jacobian positivity.

pub mod admissible;
pub mod energy;
pub mod exponents;
pub mod injectivity;
pub mod mesh;
pub mod minimize;
pub mod numeric;
pub mod sequences;
pub mod tensor;

pub use admissible::{AdmissibleClass, ClassVariant, MembershipVerdict};
pub use energy::{EnergyModel, MinorVector};
pub use exponents::Exponent;
pub use mesh::{Deformation, Mesh};
pub use minimize::{MinimizeConfig, MinimizeReport};
pub use sequences::{SequenceFamily, TestFunction};
pub use tensor::{DistortionValues, SquareMatrix};
