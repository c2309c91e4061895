//! Transport, Legendre, and Kahler-Einstein checks against analytic oracles.

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riccikit::fields::{CoshProfile, NegLogCosProfile, Profile1D, QuadLogCoshProfile, Vector};
use riccikit::transport_legendre::*;

#[test]
fn pushforward_matches_target_cdf() {
    let mu = Density1D::from_profile(QuadLogCoshProfile { a: 1.0, b: 0.5, shift: 0.3 }, f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let nu = Density1D::exponential(2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 20_000;
    let mut pushed: Vec<f64> = (0..n).map(|_| monotone_map_1d(&mu, &nu, mu.sample(&mut rng)).unwrap().0).collect();
    pushed.sort_by(f64::total_cmp);
    let ks = pushed
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let c = nu.cdf(*t);
            (c - i as f64 / n as f64).abs().max((c - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 3.0 / (n as f64).sqrt(), "KS {ks}");
}

#[test]
fn exponential_to_uniform_residual() {
    let mu = Density1D::exponential(1.0).unwrap();
    let nu = Density1D::uniform(0.0, 1.0).unwrap();
    let phi = TransportPotential1D { mu: mu.clone(), nu: nu.clone(), anchor: 0.0 };
    let (lo, hi) = (mu.quantile(0.05), mu.quantile(0.95));
    for k in 0..=50 {
        let x = lo + (hi - lo) * k as f64 / 50.0;
        let r = monge_ampere_residual(&phi, &mu, &nu, &Vector::from_element(1, x)).unwrap();
        assert!(r.abs() < 1e-6, "x={x} r={r}");
        // T' agrees with a difference quotient of T
        let h = 1e-5;
        let fd = (monotone_map_1d(&mu, &nu, x + h).unwrap().0 - monotone_map_1d(&mu, &nu, x - h).unwrap().0) / (2.0 * h);
        assert!((fd - monotone_map_1d(&mu, &nu, x).unwrap().1).abs() < 1e-7);
    }
    // the potential integrates the map: Phi(x) = x + e^-x - 1
    let x = 1.3;
    let want = x + (-x as f64).exp() - 1.0;
    assert!((riccikit::fields::PotentialField::value(&phi, &Vector::from_element(1, x)) - want).abs() < 1e-9);
}

#[test]
fn legendre_identities_for_cosh() {
    let v = Arc::new(CoshProfile { scale: 1.0 });
    let xs: Vec<f64> = (0..=1000).map(|i| -5.0 + 0.01 * i as f64).collect();
    let conj = Conjugate1D::new(v.clone(), xs).unwrap();
    for x in [-3.0f64, -0.5, 0.0, 1.2, 4.0] {
        let [vx, d1, d2, _, _] = v.derivatives(x);
        let [vs, _, ds2, _, _] = conj.derivatives(d1);
        assert!((vx + vs - x * d1).abs() < 1e-7);
        assert!((ds2 * d2 - 1.0).abs() < 1e-7);
        // closed form y asinh y - sqrt(1 + y^2)
        assert!((vs - (d1 * d1.asinh() - (1.0 + d1 * d1).sqrt())).abs() < 1e-10);
    }
}

#[test]
fn capped_power_entropic_constant() {
    let ys: Vec<f64> = (0..=4000).map(|i| -20.0 + 0.01 * i as f64).collect();
    let data = LegendreData::from_dual(&CappedPowerDual { q: 3.0 }, &ys).unwrap();
    assert!(entropic_condition_check(&data, 0.0).convex);
    let rho = max_entropic_rho(&data, 10.0);
    assert!(rho > 0.0 && rho <= 1.0, "rho {rho}");
    assert!(!entropic_condition_check(&data, 1e6).convex);
}

#[test]
fn ke_uniform_target() {
    let nu = Density1D::uniform(-0.5, 0.5).unwrap();
    let sol = ke_solve_1d(&nu, &KeOptions::default()).unwrap();
    assert!(sol.residual < 1e-8);
    assert!(sol.max_curvature() <= 2.0 * 0.25);
    assert!(sol.equation_residual(1e-6) < 1e-7);
    for x in [0.3, 2.0, 9.0] {
        assert!((sol.eval(x).0 - sol.eval(-x).0).abs() < 1e-8);
    }
    let shifted = ke_solve_1d(&nu, &KeOptions { initial_shift: 0.9, ..KeOptions::default() }).unwrap();
    for x in [-4.0, 0.0, 1.5] {
        assert!((sol.eval(x).0 - shifted.eval(x).0).abs() < 1e-8);
    }
}

#[test]
fn ke_cosine_target() {
    let nu = Density1D::from_profile(NegLogCosProfile { width: 1.0 }, -0.5, 0.5).unwrap();
    let sol = ke_solve_1d(&nu, &KeOptions::default()).unwrap();
    assert!(sol.residual < 1e-8);
    assert!(sol.max_curvature() <= 0.5);
    assert!(sol.equation_residual(1e-6) < 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_inverts_cdf(u in 1e-10f64..(1.0 - 1e-10)) {
        let g = Density1D::gaussian(0.5, 2.0).unwrap();
        let x = g.quantile(u);
        let back = if u < 0.5 { g.cdf(x) } else { 1.0 - g.survival(x) };
        prop_assert!((back - u).abs() <= 1e-12 * u.max(1e-3));
    }

    #[test]
    fn monotone_map_is_increasing(x in -3.0f64..3.0, dx in 1e-3f64..1.0) {
        let mu = Density1D::gaussian(0.0, 1.0).unwrap();
        let nu = Density1D::uniform(-1.0, 2.0).unwrap();
        let (t0, d0) = monotone_map_1d(&mu, &nu, x).unwrap();
        let (t1, _) = monotone_map_1d(&mu, &nu, x + dx).unwrap();
        prop_assert!(t1 > t0 && d0 > 0.0);
    }
}
