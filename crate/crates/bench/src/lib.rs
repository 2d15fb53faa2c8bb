//! Fixtures shared by the benchmarks.

use findist::admissible::{AdmissibleClass, BoundaryData};
use findist::energy::random_positive_matrix;
use findist::mesh::{make_grid, Mesh, Rect};
use findist::minimize::perturbed_identity;
use findist::{Deformation, EnergyModel, Exponent, SquareMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Planar Ogden problem on an `n × n` unit-square grid with a seeded
/// interior perturbation.
pub fn planar_problem(n: usize) -> (Mesh, EnergyModel, AdmissibleClass, Deformation) {
    let mesh = make_grid(n, n, Rect::UNIT);
    let model = EnergyModel::ogden_2d(1.0, 1.0, 1.0, 4.0, 2.0, 2.0).expect("valid parameters");
    let class = AdmissibleClass::a(Exponent::int(2), 2.001, Some(BoundaryData::Identity)).expect("valid class");
    let phi = perturbed_identity(&mesh, 0.3 / n as f64, 7);
    (mesh, model, class, phi)
}

pub fn matrices(dim: usize, count: usize) -> Vec<SquareMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..count).map(|_| random_positive_matrix(&mut rng, dim, 2.0, 1e-2)).collect()
}
