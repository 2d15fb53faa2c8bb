//! Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
//! Runs without the libtest harness so the lines show up in `cargo test`.

use std::time::{Duration, Instant};

use findist::admissible::{membership, AdmissibleClass, BoundaryData};
use findist::energy::{coercivity_margin, polyconvexity_probe, random_positive_matrix, EnergyModel};
use findist::exponents::{ball_s, ball_sigma, corollary_r, inverse_exponent, remark_rho, Exponent};
use findist::injectivity::{ciarlet_necas, overlap_pairs, repaired_fold};
use findist::mesh::{make_grid, DistortionKind, Deformation, Rect};
use findist::minimize::{minimize, perturbed_identity, MinimizeConfig, MinimizeReport};
use findist::sequences::{
    norm_study, shear_certificates, weak_minor_demo, FamilyKind, Index, SequenceFamily, TestFunction,
};
use findist::tensor::{distortion, SquareMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn e(s: &str) -> Exponent {
    s.parse().unwrap()
}

/// Random matrix with positive determinant rescaled so that `det = 10^u`,
/// `u ∈ [−3, 3]`.
fn random_with_det(rng: &mut ChaCha8Rng, n: usize) -> SquareMatrix {
    loop {
        let mut f = SquareMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let mut d = f.det();
        if d.abs() < 1e-6 {
            continue;
        }
        if d < 0.0 {
            for i in 0..n {
                f.set(i, 0, -f.get(i, 0));
            }
            d = -d;
        }
        let target = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let f = f.scale((target / d).powf(1.0 / n as f64));
        if (1e-3..=1e3).contains(&f.det()) {
            return f;
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut planar_equal = true;
    for i in 0..10_000 {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let f = random_with_det(&mut rng, n);
        let d = distortion(&f);
        let (ko, ki) = (d.outer.unwrap(), d.inner.unwrap());
        let m = (n - 1) as f64;
        let lower = ki.powf(1.0 / m);
        let upper = ki.powf(m);
        worst = worst.max((lower - ko) / ko).max((ko - upper) / ko);
        if n == 2 && ko != ki {
            planar_equal = false;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && planar_equal && elapsed < Duration::from_secs(1),
        format!("max relative violation {worst:.2e}, planar K_O = K_I exact: {planar_equal}, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let zero = distortion(&SquareMatrix::zero(3));
    let rank2 = distortion(&SquareMatrix::from_rows3([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0], [1.0, 3.0, 1.0]]));
    let rank1 = distortion(&SquareMatrix::from_rows3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [-1.0, -2.0, -3.0]]));
    let ok = zero.outer == Some(1.0)
        && zero.inner == Some(1.0)
        && rank2.jacobian == 0.0
        && rank2.outer == Some(1.0)
        && rank2.inner == Some(f64::INFINITY)
        && rank1.outer == Some(1.0)
        && rank1.inner == Some(1.0);
    outcome(
        ok,
        format!(
            "zero ({:?}, {:?}), rank 2 ({:?}, {:?}), rank 1 ({:?}, {:?})",
            zero.outer, zero.inner, rank2.outer, rank2.inner, rank1.outer, rank1.inner
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let sigma = ball_sigma(e("4"), e("9")).unwrap();
    let s = ball_s(sigma, e("2"), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut involution = true;
    for _ in 0..100 {
        // p > 1 so that p′ is finite and positive in the plane
        let den: i128 = rng.gen_range(1..=50);
        let num: i128 = den + rng.gen_range(1..=200);
        let p = Exponent::ratio(num, den);
        let back = inverse_exponent(inverse_exponent(p, 2).unwrap(), 2).unwrap();
        involution &= back == p;
    }
    let r = corollary_r(e("1"), 3).unwrap();
    let rho = remark_rho(e("2"), 3).unwrap();
    let elapsed = start.elapsed();
    let ok = sigma == e("40/13")
        && s == e("80/79")
        && involution
        && r == e("2")
        && rho == e("1")
        && elapsed < Duration::from_millis(100);
    outcome(ok, format!("σ = {sigma}, s = {s}, involution {involution}, r = {r}, ρ = {rho}, {elapsed:.2?}"))
}

/// Relative Frobenius error between `grad_w` and central differences of `eval_w`.
fn gradient_error(model: &EnergyModel, f: &SquareMatrix) -> f64 {
    let g = model.grad_w(f).unwrap();
    let n = f.dim();
    let mut err = 0.0;
    for i in 0..n {
        for j in 0..n {
            let h = 1e-6 * (1.0 + f.get(i, j).abs());
            let mut fp = *f;
            fp.set(i, j, f.get(i, j) + h);
            let mut fm = *f;
            fm.set(i, j, f.get(i, j) - h);
            let fd = (model.eval_w(&fp) - model.eval_w(&fm)) / (2.0 * h);
            err += (fd - g.get(i, j)).powi(2);
        }
    }
    err.sqrt() / g.frobenius()
}

fn criterion_4() -> Outcome {
    let (a, b, c, d) = (1.5, 0.75, 2.0, 0.5);
    let ogden = EnergyModel::ogden(a, b, c, d, 4.0, 4.0, 2.0, 9.0).unwrap();
    let neo = EnergyModel::neo_trace(a).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_positive_matrix(&mut rng, 3, 1.0, 0.2);
        worst = worst.max(gradient_error(&ogden, &f)).max(gradient_error(&neo, &f));
    }
    let id = SquareMatrix::identity(3);
    let w1 = ogden.eval_w(&id);
    let w2 = neo.eval_w(&id);
    let singular = ogden.eval_w(&SquareMatrix::diag(&[1.0, 1.0, 0.0]).unwrap());
    let ok = worst < 1e-6 && w1 == 3.0 * a + 3.0 * b + c + d && w2 == 3.0 * a && singular == f64::INFINITY;
    outcome(ok, format!("max gradient rel. error {worst:.2e}, W1(I) = {w1}, W2(I) = {w2}, W1(det 0) = {singular}"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let ogden = EnergyModel::ogden(1.0, 1.0, 1.0, 1.0, 4.0, 4.0, 2.0, 9.0).unwrap();
    let neo = EnergyModel::neo_trace(1.0).unwrap();
    let svk = EnergyModel::saint_venant_kirchhoff(1.0, 1.0).unwrap();
    let po = polyconvexity_probe(&ogden, 1000, 5);
    let pn = polyconvexity_probe(&neo, 1000, 5);
    let ps = polyconvexity_probe(&svk, 10_000, 5);
    let elapsed = start.elapsed();
    let ok = po.violations == 0 && pn.violations == 0 && !ps.witnesses.is_empty() && elapsed < Duration::from_secs(5);
    outcome(
        ok,
        format!(
            "violations: ogden {}/{}, neo-trace {}/{}, svk {}/{} ({} witnesses kept), {elapsed:.2?}",
            po.violations,
            po.checked,
            pn.violations,
            pn.checked,
            ps.violations,
            ps.checked,
            ps.witnesses.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let r = coercivity_margin(&EnergyModel::neo_trace(1.0).unwrap(), 10_000, 6);
    let target = 3f64.powf(-0.5);
    let ok = r.alpha_hat >= target - 1e-9 && (r.conformal_alpha - target).abs() <= 1e-6;
    outcome(ok, format!("alpha_hat {:.12}, conformal {:.12}, 3^(-1/2) = {target:.12}", r.alpha_hat, r.conformal_alpha))
}

fn criterion_7() -> Outcome {
    let square = make_grid(10, 10, Rect::UNIT);
    let id = Deformation::identity(&square);
    let r_id = ciarlet_necas(&square, &id, None).unwrap();
    let id_ok = (r_id.sum_image_volume - 1.0).abs() <= 1e-12
        && (r_id.union_volume - 1.0).abs() <= r_id.raster_error_bound
        && r_id.passes
        && overlap_pairs(&square, &id).is_empty();

    let (fold, phi) = repaired_fold(5);
    let r_fold = ciarlet_necas(&fold, &phi, None).unwrap();
    let pairs = overlap_pairs(&fold, &phi);
    // the fold maps both halves onto the same 5 × 10 grid of 0.2 × 0.2
    // cells; each left triangle coincides with its right twin
    let half = fold.simplex_count() / 2;
    let areas_ok = pairs.len() == half
        && pairs.iter().all(|p| p.second == p.first + half && (p.area - 0.02).abs() <= 1e-10);
    let fold_ok = !r_fold.passes && (r_fold.ratio - 2.0).abs() <= 0.02 && areas_ok;
    outcome(
        id_ok && fold_ok,
        format!(
            "identity lhs {:.6} rhs {:.6} (bound {:.1e}); fold lhs {:.6} rhs {:.6} ratio {:.5}, {} overlapping pairs",
            r_id.sum_image_volume,
            r_id.union_volume,
            r_id.raster_error_bound,
            r_fold.sum_image_volume,
            r_fold.union_volume,
            r_fold.ratio,
            pairs.len()
        ),
    )
}

fn run_regression(threads: usize) -> (Deformation, MinimizeReport, Duration) {
    let mesh = make_grid(10, 10, Rect::UNIT);
    let model = EnergyModel::ogden_2d(1.0, 1.0, 1.0, 4.0, 2.0, 2.0).unwrap();
    let class = AdmissibleClass::a(e("2"), 2.001, Some(BoundaryData::Identity)).unwrap();
    let phi0 = perturbed_identity(&mesh, 0.03, 7);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let start = Instant::now();
    let (phi, report) = pool.install(|| minimize(&mesh, &model, &class, &phi0, &MinimizeConfig::default())).unwrap();
    (phi, report, start.elapsed())
}

fn criterion_8() -> Outcome {
    let mesh = make_grid(10, 10, Rect::UNIT);
    let model = EnergyModel::ogden_2d(1.0, 1.0, 1.0, 4.0, 2.0, 2.0).unwrap();
    let class = AdmissibleClass::a(e("2"), 2.001, Some(BoundaryData::Identity)).unwrap();
    let (phi, report, elapsed) = run_regression(1);
    let (phi4, report4, _) = run_regression(4);
    let identical = serde_json::to_string(&report).unwrap() == serde_json::to_string(&report4).unwrap()
        && phi.to_json_string() == phi4.to_json_string();

    let descent = report.rows.windows(2).all(|w| w[0].mu != w[1].mu || w[1].objective < w[0].objective);
    let feasible = report.rows.iter().all(|r| r.min_jacobian > report.det_floor);
    let last = report.last();
    let initial_inner = report.rows[0].k_inner_norm;
    let cn = ciarlet_necas(&mesh, &phi, None).unwrap();
    let injective = cn.passes && overlap_pairs(&mesh, &phi).is_empty();
    let verdict = membership(&mesh, &phi, &model, &class).unwrap().with_injectivity(injective);
    let ok = mesh.simplex_count() == 200
        && descent
        && feasible
        && last.grad_norm < 1e-6
        && initial_inner > class.bound
        && last.k_inner_norm <= class.bound + 1e-6
        && verdict.overall
        && elapsed < Duration::from_secs(60)
        && identical;
    outcome(
        ok,
        format!(
            "{} accepted steps ({:?}), energy {:.12} -> {:.12}, |grad| {:.2e}, ‖K_I‖₂ {:.6} -> {:.9}, audit {}, \
             1-vs-4 threads identical: {identical}, {elapsed:.2?}",
            report.accepted_steps(),
            report.termination,
            report.rows[0].energy,
            last.energy,
            last.grad_norm,
            initial_inner,
            last.k_inner_norm,
            if verdict.overall { "pass".to_string() } else { verdict.failed.join(",") },
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let ks: Vec<u64> = (0..=10).map(|i| 1u64 << i).collect();
    let rows = norm_study(FamilyKind::PlanarShear, &ks, &[1.0, 2.0], 2, DistortionKind::Outer).unwrap();
    let l1: Vec<f64> = rows.iter().filter(|r| r.s == 1.0).map(|r| r.norm).collect();
    let l2: Vec<f64> = rows.iter().filter(|r| r.s == 2.0).map(|r| r.norm).collect();
    let agree = rows.iter().all(|r| r.richardson_ratio < 5e-3);
    let sup_l1 = l1.iter().copied().fold(0.0, f64::max);
    // uniform bound pinned at four times the k = 1 value
    let bounded = sup_l1 <= 4.0 * l1[0];
    let growth = l2.iter().map(|v| v / l2[0]).fold(0.0, f64::max);
    let increasing = l2.windows(2).all(|w| w[1] > w[0]);
    let one = SequenceFamily::planar_shear(Index::Finite(1));
    let mut identity = true;
    for i in 0..=40 {
        for j in 0..=40 {
            let x = [-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0];
            identity &= one.eval(&x).unwrap() == x.to_vec();
        }
    }
    let indices: Vec<Index> = ks.iter().map(|&k| Index::Finite(k)).collect();
    let certs = shear_certificates(&indices, 16).unwrap();
    let certified = certs.iter().all(|c| c.certified);
    let elapsed = start.elapsed();
    let ok = agree && bounded && growth >= 10.0 && increasing && identity && certified && elapsed < Duration::from_secs(120);
    outcome(
        ok,
        format!(
            "L1: k=1 {:.4}, sup {:.4} (ratio {:.3}); L2 growth x{:.2}; quadrature agreement {agree}; \
             φ₁ = id {identity}; {} of {} k certified; {elapsed:.2?}",
            l1[0],
            sup_l1,
            sup_l1 / l1[0],
            growth,
            certs.iter().filter(|c| c.certified).count(),
            certs.len()
        ),
    )
}

fn criterion_10() -> Outcome {
    let ks: Vec<u64> = (0..=14).map(|i| 1u64 << i).collect();
    let planar = weak_minor_demo(
        FamilyKind::PlanarShear,
        &TestFunction::Bump { center: vec![0.0, 0.0], radius: 0.9 },
        &ks,
        256,
    )
    .unwrap();
    let ball = weak_minor_demo(
        FamilyKind::PuncturedBall { dim: 2 },
        &TestFunction::Bump { center: vec![0.0, 0.0], radius: 0.5 },
        &ks,
        256,
    )
    .unwrap();
    outcome(
        planar.converged && ball.converged && ball.limit == 0.0,
        format!(
            "planar: last {:.10} limit {:.10} (rel. change {:.1e}, rel. error {:.1e}); \
             ball: last {:.3e} limit {} (rel. change {:.1e})",
            planar.rows.last().unwrap().integral,
            planar.limit,
            planar.final_relative_change,
            planar.final_relative_error,
            ball.rows.last().unwrap().integral,
            ball.limit,
            ball.final_relative_change
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("distortion algebra", criterion_1),
        ("degenerate conventions", criterion_2),
        ("exponent algebra", criterion_3),
        ("energy correctness", criterion_4),
        ("polyconvexity probes", criterion_5),
        ("coercivity", criterion_6),
        ("injectivity diagnostics", criterion_7),
        ("minimizer", criterion_8),
        ("planar sequence sharpness", criterion_9),
        ("weak-minor demo", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} [{}] {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
