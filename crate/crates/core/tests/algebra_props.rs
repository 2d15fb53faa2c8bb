use findist::energy::{minors, random_rotation, EnergyModel};
use findist::exponents::{codistortion_exponent, composition_exponent, inverse_exponent, Exponent};
use findist::tensor::{distortion, operator_outer, singular_spectrum, SquareMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(n: usize) -> impl Strategy<Value = SquareMatrix> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| SquareMatrix::new(n, &v).unwrap())
}

fn any_matrix() -> impl Strategy<Value = SquareMatrix> {
    prop_oneof![matrix(2), matrix(3)]
}

/// Flips the first column when needed so that `det > 0`; rejects near-singular draws.
fn oriented(f: SquareMatrix) -> Option<SquareMatrix> {
    let d = f.det();
    if d.abs() < 1e-3 {
        return None;
    }
    let mut g = f;
    if d < 0.0 {
        for i in 0..g.dim() {
            g.set(i, 0, -g.get(i, 0));
        }
    }
    Some(g)
}

fn mat_mul(a: &SquareMatrix, b: &SquareMatrix) -> SquareMatrix {
    SquareMatrix::from_fn(a.dim(), |i, j| (0..a.dim()).map(|k| a.get(i, k) * b.get(k, j)).sum())
}

fn rational() -> impl Strategy<Value = Exponent> {
    (1i128..400, 1i128..60).prop_map(|(a, b)| Exponent::ratio(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn adjugate_identity(f in any_matrix()) {
        let n = f.dim();
        let adj = f.adjugate();
        let prod = mat_mul(&f, &adj);
        let det = f.det();
        let resid = SquareMatrix::from_fn(n, |i, j| prod.get(i, j) - if i == j { det } else { 0.0 });
        let tol = 1e-12 * (1.0 + f.frobenius()) * (1.0 + adj.frobenius());
        prop_assert!(resid.frobenius() <= tol, "{} > {}", resid.frobenius(), tol);
    }

    #[test]
    fn two_sided_distortion(f in any_matrix()) {
        let Some(f) = oriented(f) else { return Ok(()) };
        let n = f.dim() as f64;
        let d = distortion(&f);
        let (ko, ki) = (d.outer.unwrap(), d.inner.unwrap());
        prop_assert!(ki.powf(1.0 / (n - 1.0)) <= ko * (1.0 + 1e-10));
        prop_assert!(ko <= ki.powf(n - 1.0) * (1.0 + 1e-10));
    }

    #[test]
    fn planar_outer_equals_inner(f in matrix(2)) {
        let Some(f) = oriented(f) else { return Ok(()) };
        let d = distortion(&f);
        prop_assert_eq!(d.outer, d.inner);
    }

    #[test]
    fn operator_outer_homogeneity(f in any_matrix(), lambda in 0.05f64..20.0, p in 1.0f64..6.0) {
        let Some(f) = oriented(f) else { return Ok(()) };
        let n = f.dim() as f64;
        let lhs = operator_outer(&f.scale(lambda), p);
        let rhs = lambda.powf(1.0 - n / p) * operator_outer(&f, p);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn spectrum_matches_invariants(f in any_matrix()) {
        let s = singular_spectrum(&f);
        let sq: f64 = s.as_slice().iter().map(|x| x * x).sum();
        let prod: f64 = s.as_slice().iter().product();
        let fro = f.frobenius_sq();
        prop_assert!((sq - fro).abs() <= 1e-10 * fro.max(1e-300));
        let det = f.det().abs();
        prop_assert!((prod - det).abs() <= 1e-10 * (det + 1e-8 * fro.powf(f.dim() as f64 / 2.0)));
    }

    #[test]
    fn energies_are_frame_indifferent(f in matrix(3), seed in any::<u64>()) {
        let Some(f) = oriented(f) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_rotation(&mut rng, 3);
        let rf = mat_mul(&r, &f);
        for model in [
            EnergyModel::ogden(1.0, 1.0, 1.0, 1.0, 4.0, 4.0, 2.0, 9.0).unwrap(),
            EnergyModel::neo_trace(1.0).unwrap(),
        ] {
            let (a, b) = (model.eval_w(&f), model.eval_w(&rf));
            prop_assert!((a - b).abs() <= 1e-10 * a.abs(), "{:?}: {a} vs {b}", model.name());
        }
    }

    #[test]
    fn minor_representation_agrees(f in matrix(3)) {
        let Some(f) = oriented(f) else { return Ok(()) };
        for model in [
            EnergyModel::ogden(1.0, 0.5, 2.0, 0.3, 4.5, 4.0, 2.0, 9.0).unwrap(),
            EnergyModel::neo_trace(2.0).unwrap(),
        ] {
            let w = model.eval_w(&f);
            let g = model.eval_g(&minors(&f)).unwrap();
            prop_assert!((w - g).abs() <= 1e-12 * w.abs());
        }
    }

    #[test]
    fn planar_inverse_exponent_is_involution(p in rational()) {
        prop_assume!(p > Exponent::int(1));
        let once = inverse_exponent(p, 2).unwrap();
        prop_assert_eq!(inverse_exponent(once, 2).unwrap(), p);
    }

    #[test]
    fn codistortion_chain(q in rational(), p in rational(), n in 2u32..5) {
        let nm1 = Exponent::int(n as i128 - 1);
        prop_assume!(q > nm1 && q <= p);
        let direct = codistortion_exponent(q, p, n).unwrap();
        let via = composition_exponent(inverse_exponent(p, n).unwrap(), inverse_exponent(q, n).unwrap()).unwrap();
        prop_assert_eq!(direct, via);
    }
}

#[test]
fn chain_reaches_infinity_at_the_edge() {
    let q = Exponent::int(2);
    let p = Exponent::int(5);
    assert_eq!(inverse_exponent(q, 3).unwrap(), Exponent::INF);
    let direct = codistortion_exponent(q, p, 3).unwrap();
    let via = composition_exponent(inverse_exponent(p, 3).unwrap(), inverse_exponent(q, 3).unwrap()).unwrap();
    assert_eq!(direct, via);
    assert_eq!(direct, Exponent::ratio(5, 3));
}

#[test]
fn spatial_inverse_exponent_is_not_an_involution() {
    let p = Exponent::int(3);
    let once = inverse_exponent(p, 3).unwrap();
    assert_eq!(once, Exponent::int(3));
    let p = Exponent::int(4);
    let once = inverse_exponent(p, 3).unwrap();
    assert_eq!(once, Exponent::int(2));
    assert_eq!(inverse_exponent(once, 3).unwrap(), Exponent::INF);
}
