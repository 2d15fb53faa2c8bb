use findist::sequences::{Index, SequenceFamily};
use proptest::prelude::*;

fn shear_index() -> impl Strategy<Value = Index> {
    prop_oneof![(1u64..5000).prop_map(Index::Finite), Just(Index::Limit)]
}

fn off_seam(v: f64) -> bool {
    [-1.0, -0.5, 0.0, 0.5, 1.0].iter().all(|s| (v - s).abs() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn shear_reflections_are_exact(k in shear_index(), a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
        let f = SequenceFamily::planar_shear(k);
        let y = f.eval(&[a, b]).unwrap();
        let ya = f.eval(&[-a, b]).unwrap();
        let yb = f.eval(&[a, -b]).unwrap();
        prop_assert_eq!(ya[0], -y[0]);
        prop_assert_eq!(yb[0], y[0]);
        prop_assert_eq!(y[1], b);
    }

    #[test]
    fn shear_pins_the_sides_and_stays_in_the_square(k in shear_index(), a in -1.0f64..=1.0, t in -1.0f64..=1.0) {
        let f = SequenceFamily::planar_shear(k);
        prop_assert_eq!(f.eval(&[1.0, t]).unwrap()[0], 1.0);
        prop_assert_eq!(f.eval(&[-1.0, t]).unwrap()[0], -1.0);
        let y = f.eval(&[a, t]).unwrap();
        prop_assert!(y.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn shear_gradient_matches_differences(k in 1u64..300, a in -0.99f64..0.99, b in -0.99f64..0.99) {
        prop_assume!(off_seam(a) && off_seam(b));
        let f = SequenceFamily::planar_shear(Index::Finite(k));
        let g = f.eval_gradient(&[a, b]).unwrap();
        prop_assert!(g.det() > 0.0);
        let h = 1e-7;
        for j in 0..2 {
            let mut p = [a, b];
            let mut m = [a, b];
            p[j] += h;
            m[j] -= h;
            let (yp, ym) = (f.eval(&p).unwrap(), f.eval(&m).unwrap());
            for i in 0..2 {
                let fd = (yp[i] - ym[i]) / (2.0 * h);
                prop_assert!((fd - g.get(i, j)).abs() < 1e-6 * (1.0 + fd.abs()), "{i}{j}: {fd} vs {}", g.get(i, j));
            }
        }
    }

    #[test]
    fn ball_gradient_matches_differences(k in 1u64..50, dim in 2usize..4, x in prop::collection::vec(-0.7f64..0.7, 3)) {
        let x = &x[..dim];
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(r > 0.05 && r < 0.95);
        let f = SequenceFamily::punctured_ball(dim, Index::Finite(k)).unwrap();
        let g = f.eval_gradient(x).unwrap();
        let h = 1e-7;
        for j in 0..dim {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[j] += h;
            m[j] -= h;
            let (yp, ym) = (f.eval(&p).unwrap(), f.eval(&m).unwrap());
            for i in 0..dim {
                let fd = (yp[i] - ym[i]) / (2.0 * h);
                prop_assert!((fd - g.get(i, j)).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }
}

#[test]
fn limit_map_has_no_overlap() {
    let certs = findist::sequences::shear_certificates(&[Index::Limit], 16).unwrap();
    let c = &certs[0];
    assert_eq!(c.k, "inf");
    assert!(c.overlaps.is_empty());
    // the middle of the x₂ = 0 line collapses, so elements there degenerate
    assert!(c.min_jacobian >= 0.0);
}
