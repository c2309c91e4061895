//! Closed-form curvature of each metric family against the generic
//! finite-difference pipeline.

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riccikit::fields::{
    ExpQuadratic, Matrix, MetricField, PotentialField, Quadratic, Separable, StencilOnly, Vector, ZeroPotential,
};
use riccikit::fields::{CoshProfile, QuadraticProfile};
use riccikit::linalg::min_eigenvalue;
use riccikit::metric_families::*;
use riccikit::tensor_core::{christoffel, generalized_ricci, geometric_ricci_fd, riemannian_hessian};

fn transport_data(d: usize) -> HessianMetricData {
    let mut terms = vec![(0.3, Vector::from_fn(d, |i, _| 0.5 - 0.2 * i as f64))];
    if d > 1 {
        terms.push((0.2, Vector::from_fn(d, |i, _| if i == 1 { -0.6 } else { 0.3 })));
    }
    let phi: Arc<dyn PotentialField> = Arc::new(ExpQuadratic { quadratic: Quadratic::standard(d), terms });
    let w: Arc<dyn PotentialField> = Arc::new(ExpQuadratic {
        quadratic: Quadratic::scaled_identity(d, 0.8),
        terms: vec![(0.1, Vector::from_element(d, 0.4))],
    });
    let v: Arc<dyn PotentialField> = Arc::new(MongeAmpereSource { phi: phi.clone(), w: w.clone() });
    HessianMetricData { phi, v, w }
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(d, |_, _| rng.random_range(lo..hi))
}

#[test]
fn hessian_family_matches_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 1..=3 {
        let data = transport_data(d);
        let metric = HessianMetric(data.phi.clone());
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x = random_point(&mut rng, d, -1.0, 1.0);
            let closed = hessian_ricci(&data, &x).unwrap().ric;
            let fd = generalized_ricci(&StencilOnly(&metric), data.v.as_ref(), &x, f64::INFINITY).unwrap();
            worst = worst.max((closed - fd.ric_gmu).abs().max());
        }
        assert!(worst < 1e-4, "d={d} worst {worst}");
    }
}

#[test]
fn monge_ampere_source_is_consistent() {
    let data = transport_data(2);
    let x = Vector::from_vec(vec![0.2, -0.4]);
    let h = 1e-5;
    let g = data.v.gradient(&x);
    for k in 0..2 {
        let mut p = x.clone();
        let mut m = x.clone();
        p[k] += h;
        m[k] -= h;
        assert!(((data.v.value(&p) - data.v.value(&m)) / (2.0 * h) - g[k]).abs() < 1e-7);
        let col = (data.v.gradient(&p) - data.v.gradient(&m)) / (2.0 * h);
        assert!((col - data.v.hessian(&x).column(k)).norm() < 1e-6);
    }
}

#[test]
fn product_family_matches_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cases: Vec<(usize, ProductProfile)> = vec![
        (2, ProductProfile::Power { p: 0.5 }),
        (2, ProductProfile::Exp { lambda: 0.7 }),
        (4, ProductProfile::Power { p: 0.75 }),
        (4, ProductProfile::Exp { lambda: 1.0 }),
    ];
    for (d, profile) in cases {
        let data = ProductMetricData::uniform(d, profile);
        let v = Separable::uniform(d, Arc::new(CoshProfile { scale: 0.8 }));
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x = random_point(&mut rng, d, 0.75, 1.5);
            let closed = product_ricci(&data, &v, &x).unwrap();
            let fd = generalized_ricci(&StencilOnly(&data), &v, &x, f64::INFINITY).unwrap();
            worst = worst.max((closed - fd.ric_gmu).abs().max());
        }
        assert!(worst < 1e-4, "d={d} worst {worst}");
    }
}

#[test]
fn conformal_radial_family_matches_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for d in [3usize, 6] {
        for n in [f64::INFINITY, 0.0, -(d as f64)] {
            let data = ConformalMetricData::radial(d, 0.6, 0.05);
            let metric = data.metric();
            let v = Quadratic::standard(d);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let dir = random_point(&mut rng, d, -1.0, 1.0);
                let x = &dir / dir.norm() * rng.random_range(0.5..1.5);
                let closed = conformal_ricci_n(&data, &v, n, &x).unwrap();
                let fd = generalized_ricci(&StencilOnly(&metric), &v, &x, n).unwrap();
                worst = worst.max((closed - fd.ric_gmu_n).abs().max());
            }
            assert!(worst < 1e-4, "d={d} n={n} worst {worst}");
        }
    }
}

#[test]
fn conformal_pieces_match_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let phi: Arc<dyn PotentialField> = Arc::new(ExpQuadratic {
        quadratic: Quadratic::scaled_identity(3, 0.3),
        terms: vec![(0.2, Vector::from_vec(vec![0.5, -0.3, 0.8]))],
    });
    let metric = ConformalMetric(phi.clone());
    let f = Separable::uniform(3, Arc::new(CoshProfile { scale: 1.3 }));
    for _ in 0..50 {
        let x = random_point(&mut rng, 3, 0.0, 1.0);
        let closed = conformal_christoffel(phi.as_ref(), &x);
        let fd = christoffel(&StencilOnly(&metric), &x, None).unwrap();
        assert!(closed.max_abs_diff(&fd) <= 1e-5 * closed.max_abs().max(1.0));
        let hc = conformal_hessian(phi.as_ref(), &f, &x);
        let hf = riemannian_hessian(&StencilOnly(&metric), &f, &x).unwrap();
        assert!((&hc - hf).norm() <= 1e-5 * hc.norm().max(1.0));
        let rc = conformal_geometric_ricci(phi.as_ref(), &x);
        let rf = geometric_ricci_fd(&StencilOnly(&metric), &x, None).unwrap();
        assert!((rc - rf).abs().max() < 1e-4);
    }
}

#[test]
fn conformal_trivial_boundary() {
    let data = ConformalMetricData { phi: Arc::new(ZeroPotential(3)), radial: None };
    let ii0 = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0]));
    let n0 = Vector::from_vec(vec![0.0, 0.0, 1.0]);
    let b = conformal_boundary(&data, &ZeroPotential(3), &n0, &n0, &ii0, 3.0).unwrap();
    assert_eq!((b.ii_g, b.h_gmu, b.measure_factor), (ii0, 3.0, 1.0));
}

#[test]
fn entropic_one_dimensional_gaussian() {
    let prof = Arc::new(QuadraticProfile { sigma: 1.0, center: 0.0 });
    let v = riccikit::fields::Lifted1D(prof);
    let r = entropic_hessian_ricci(&v, &Vector::from_element(1, 0.7)).unwrap();
    assert!((r[(0, 0)] - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ricci_dominates_refined_q(x in proptest::collection::vec(-1.5f64..1.5, 3)) {
        let data = transport_data(3);
        let x = Vector::from_vec(x);
        let ric = hessian_ricci(&data, &x).unwrap();
        let q = refined_q(&data, &x).unwrap();
        prop_assert!(min_eigenvalue(&(ric.ric - q)) >= -1e-8);
        let lower = hessian_h_lower_bound(&data, &x).unwrap();
        prop_assert!(min_eigenvalue(&(ric.h - lower)) >= -1e-8);
    }

    #[test]
    fn product_metric_is_diagonal_positive(p in 0.1f64..0.9, t in 0.2f64..3.0) {
        let data = ProductMetricData::uniform(2, ProductProfile::Power { p });
        let x = Vector::from_vec(vec![t, t + 0.1]);
        let g = data.metric(&x);
        prop_assert!(g[(0, 1)] == 0.0 && g[(0, 0)] > 0.0);
        prop_assert!(product_orthant_convexity(&data, &[x]));
    }
}
