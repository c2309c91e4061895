//! Convex-body sampling and boundary quantities against moment and stencil oracles.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riccikit::convex_geometry::*;
use riccikit::fields::{Matrix, Vector};

fn mean_and_err(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn simplex_cone_measure_moments() {
    let body = ConvexBody::Simplex { dim: 4, scale: 1.0 };
    let mut s = ConeMeasureSampler::new(body, ChaCha8Rng::seed_from_u64(8)).unwrap();
    let xs = s.sample(100_000).unwrap();
    let x1: Vec<f64> = xs.iter().map(|x| x[0]).collect();
    let (m, _) = mean_and_err(&x1);
    let centered: Vec<f64> = x1.iter().map(|v| (v - m).powi(2)).collect();
    let (var, err) = mean_and_err(&centered);
    assert!((var - 3.0 / 80.0).abs() < 4.0 * err, "{var} +- {err}");
}

#[test]
fn polar_moment_identity() {
    // int |x|^2 d sigma = (1 + 2/d) int |x|^2 d lambda
    for (d, body) in [
        (3, ConvexBody::Ball { dim: 3, radius: 1.5 }),
        (4, ConvexBody::Simplex { dim: 4, scale: 1.0 }),
        (6, ConvexBody::LpBall { dim: 6, p: 4.0, radius: 1.0 }),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        let n = 40_000;
        let mut inner = Vec::with_capacity(n);
        let mut outer = Vec::with_capacity(n);
        for _ in 0..n {
            let x = body.sample_uniform(&mut rng).unwrap();
            inner.push(x.norm_squared() * (1.0 + 2.0 / d as f64));
            outer.push(body.sample_cone(&mut rng).unwrap().norm_squared());
        }
        let (a, ea) = mean_and_err(&inner);
        let (b, eb) = mean_and_err(&outer);
        assert!((a - b).abs() < 3.0 * (ea * ea + eb * eb).sqrt() + 1e-12, "d={d}: {a} vs {b}");
    }
}

#[test]
fn sphere_first_moments_vanish() {
    let body = ConvexBody::Ball { dim: 5, radius: 1.0 };
    let mut s = ConeMeasureSampler::new(body, ChaCha8Rng::seed_from_u64(2)).unwrap();
    let n = 20_000;
    let xs = s.sample(n).unwrap();
    for i in 0..5 {
        let m = xs.iter().map(|x| x[i]).sum::<f64>() / n as f64;
        assert!(m.abs() < 3.0 / (n as f64).sqrt());
    }
}

#[test]
fn facet_sampling_matches_projection() {
    // projected uniform simplex samples against direct Dirichlet facet draws
    let body = ConvexBody::Simplex { dim: 3, scale: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 5000;
    let mut a: Vec<f64> = (0..n).map(|_| body.sample_cone(&mut rng).unwrap()[0]).collect();
    // direct Dirichlet(1, 1, 1) draws from normalized exponentials
    let mut b: Vec<f64> = (0..n)
        .map(|_| {
            let e: Vec<f64> = (0..3).map(|_| rand_distr::Distribution::<f64>::sample(&rand_distr::Exp1, &mut rng)).collect();
            e[0] / e.iter().sum::<f64>()
        })
        .collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let mut ks: f64 = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < n && j < n {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        ks = ks.max((i as f64 / n as f64 - j as f64 / n as f64).abs());
    }
    assert!(ks < 1.63 * (2.0 / n as f64).sqrt(), "KS {ks}");
}

#[test]
fn diagonality_of_simplices() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for t in [1.0, 2.5] {
        let body = ConvexBody::Simplex { dim: 5, scale: t };
        let pts: Vec<Vector> = (0..500).map(|_| body.sample_cone(&mut rng).unwrap()).collect();
        let (lo, hi) = diagonality_bounds(&body, &pts).unwrap();
        assert!((lo - 1.0 / t).abs() < 1e-10 && (hi - 1.0 / t).abs() < 1e-10);
    }
}

#[test]
fn polar_norm_matches_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for body in [
        ConvexBody::Ball { dim: 3, radius: 1.0 },
        ConvexBody::Simplex { dim: 3, scale: 1.0 },
        ConvexBody::LpBall { dim: 3, p: 4.0, radius: 1.0 },
        ConvexBody::Ellipse { a: 2.0, b: 1.0 },
    ] {
        for _ in 0..20 {
            let x = body.sample_uniform(&mut rng).unwrap();
            let d = x.len();
            let h = 1e-6;
            let project = |y: &Vector| y / body.gauge(y);
            let mut jac = Matrix::zeros(d, d);
            for k in 0..d {
                let mut a = x.clone();
                let mut b = x.clone();
                a[k] += h;
                b[k] -= h;
                jac.set_column(k, &((project(&a) - project(&b)) / (2.0 * h)));
            }
            let op = jac.singular_values().max();
            let closed = body.polar_map_norm(&x).unwrap();
            assert!((op - closed).abs() < 1e-5 * closed.max(1.0), "{op} vs {closed}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_is_homogeneous(x in proptest::collection::vec(0.01f64..2.0, 3), t in 0.1f64..10.0) {
        let x = Vector::from_vec(x);
        for body in [
            ConvexBody::Ball { dim: 3, radius: 1.3 },
            ConvexBody::Simplex { dim: 3, scale: 0.7 },
            ConvexBody::LpBall { dim: 3, p: 3.0, radius: 1.0 },
            ConvexBody::Box { lower: vec![-1.0; 3], upper: vec![2.0; 3] },
        ] {
            let a = body.gauge(&(&x * t));
            prop_assert!((a - t * body.gauge(&x)).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn normals_support_the_body(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for body in [ConvexBody::LpBall { dim: 3, p: 4.0, radius: 1.0 }, ConvexBody::Ball { dim: 3, radius: 2.0 }, ConvexBody::Ellipse { a: 2.0, b: 1.0 }] {
            let x = body.sample_cone(&mut rng).unwrap();
            let (_, n) = body.gauge_and_normal(&x).unwrap();
            for _ in 0..20 {
                let y = body.sample_uniform(&mut rng).unwrap();
                prop_assert!((&x - y).dot(&n) >= -1e-12);
            }
        }
    }
}
