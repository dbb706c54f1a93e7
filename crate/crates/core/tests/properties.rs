use proptest::prelude::*;

use ngon_core::calculus::{self, Functional};
use ngon_core::lab::{verify, Constants, LocalModel, Target};
use ngon_core::manifold::{residuals, retract, sample, sample_convex, seeded_rng, TangentBasis};
use ngon_core::polygon::isoperimetric_constant;
use ngon_core::{ManifoldPoint, VertexPolygon};

fn point(n: usize, seed: u64) -> ManifoldPoint {
    sample(n, &mut seeded_rng(seed), 100_000).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variance_identity_holds(n in 3usize..20, seed in any::<u64>()) {
        let s = point(n, seed).summary().unwrap();
        let nf = n as f64;
        let lhs = nf * nf * s.side_variance;
        let rhs = nf * s.side_square_sum - s.perimeter * s.perimeter;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn convex_points_have_nonnegative_deficit(n in 3usize..16, seed in any::<u64>()) {
        let m = sample_convex(n, &mut seeded_rng(seed), 100_000).unwrap();
        let s = m.summary().unwrap();
        prop_assert!(s.deficit >= -1e-9 * s.perimeter.powi(2).max(1.0));
        prop_assert!(verify(&m, &Constants::default()).unwrap().all_pass());
    }

    #[test]
    fn dilation_laws(n in 3usize..12, seed in any::<u64>(), alpha in 0.05f64..20.0) {
        let p = point(n, seed).to_vertices().unwrap();
        let (a, b) = (p.summary().unwrap(), p.dilate(alpha).summary().unwrap());
        prop_assert!((b.deficit - alpha * alpha * a.deficit).abs() <= 1e-9 * (alpha * alpha * a.perimeter.powi(2)));
        prop_assert!((b.angle_variance - a.angle_variance).abs() <= 1e-9 * a.angle_variance.max(1e-12));
        prop_assert!((b.area - alpha * alpha * a.area).abs() <= 1e-12 * alpha * alpha * a.area);
    }

    #[test]
    fn vertex_round_trip(n in 3usize..16, seed in any::<u64>()) {
        let m = point(n, seed);
        let p = m.to_vertices().unwrap();
        let (back, scale) = p.to_manifold_point().unwrap();
        prop_assert!((scale - 1.0).abs() < 1e-9);
        for (a, b) in m.coords().iter().zip(back.coords()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_round_trip(n in 3usize..16, seed in any::<u64>()) {
        let p = point(n, seed).to_vertices().unwrap();
        let q = VertexPolygon::from_csv_str(&p.to_csv_string()).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn retraction_lands_on_manifold(n in 3usize..16, seed in any::<u64>(), eps in 1e-8f64..1e-3) {
        let m = point(n, seed);
        let mut rng = seeded_rng(seed ^ 0x5eed);
        let z: Vec<f64> = m.coords().iter().map(|v| v + eps * rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        if let Ok(q) = retract(&z) {
            prop_assert!(residuals(q.x(), q.r()).max_abs() < 1e-9);
            let dist = q.coords().iter().zip(&z).fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
            prop_assert!(dist < 100.0 * eps * n as f64);
        }
    }

    #[test]
    fn ratio_invariant_under_relabeling(n in 3usize..12, seed in any::<u64>(), k in 0usize..12) {
        let m = point(n, seed);
        let a = Target::MainTheorem.ratio(&m.coords());
        let b = Target::MainTheorem.ratio(&m.rotated(k).coords());
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0)),
            (None, None) => {}
            _ => prop_assert!(false),
        }
    }
}

#[test]
fn regular_polygon_minimizes_scaled_isoperimetric_quotient() {
    for n in 3..=20 {
        let s = ManifoldPoint::regular(n).summary().unwrap();
        let q = s.perimeter * s.perimeter / s.area;
        assert!((q - isoperimetric_constant(n)).abs() < 1e-12 * q);
    }
}

#[test]
fn taylor_constant_is_stable_across_t() {
    for n in [3, 5, 8] {
        let basis = TangentBasis::at_regular(n);
        let mut rng = seeded_rng(40 + n as u64);
        let dirs: Vec<Vec<f64>> = (0..100).map(|_| basis.random_unit(&mut rng)).collect();
        for f in [Functional::Deficit, Functional::Phi] {
            let hess = calculus::hessian_at_star(f, n, calculus::DEFAULT_STEP).unwrap();
            let c2 = calculus::fit_taylor_constant(f, &hess, &dirs, 1e-2).unwrap();
            let c3 = calculus::fit_taylor_constant(f, &hess, &dirs, 1e-3).unwrap();
            assert!(c2.is_finite() && c3.is_finite());
            assert!(c3 <= 1.1 * c2, "{f:?} n={n}: {c2} vs {c3}");
        }
    }
}

#[test]
fn deficit_gradient_orthogonal_to_tangent_space() {
    for n in 3..=16 {
        let star = ManifoldPoint::regular(n).coords();
        let g = calculus::grad_fd(ngon_core::polygon::deficit_at, &star, calculus::DEFAULT_STEP).unwrap();
        for w in TangentBasis::at_regular(n).vectors() {
            let dot: f64 = g.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-6, "n={n}: {dot}");
        }
    }
}

#[test]
fn local_maximum_matches_sampled_sphere() {
    for n in [3, 4] {
        let model = LocalModel::new(n, Target::MainTheorem).unwrap();
        let (bound, _) = model.max_rayleigh().unwrap();
        let basis = TangentBasis::at_regular(n);
        let mut rng = seeded_rng(n as u64);
        let star = ManifoldPoint::regular(n).coords();
        let mut best: f64 = 0.0;
        for _ in 0..4000 {
            let w = basis.random_unit(&mut rng);
            let z: Vec<f64> = star.iter().zip(&w).map(|(a, b)| a + 1e-3 * b).collect();
            if let Some(v) = retract(&z).ok().and_then(|m| Target::MainTheorem.ratio(&m.coords())) {
                best = best.max(v);
            }
        }
        assert!((best - bound).abs() <= 0.05 * bound, "n={n}: sampled {best}, Rayleigh {bound}");
    }
}
