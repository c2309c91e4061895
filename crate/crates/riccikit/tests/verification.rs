//! Monte Carlo estimates against closed-form moments.

use riccikit::fields::{QuadLogCoshProfile, Vector};
use riccikit::inequality_catalog::{instantiate, Params};
use riccikit::verification_engine::*;
use statrs::distribution::{ContinuousCDF, Gamma};

const N: usize = 200_000;

fn params(json: &str) -> Params {
    serde_json::from_str(json).unwrap()
}

fn row<'a>(rows: &'a [ReportRow], function: &str) -> &'a ReportRow {
    rows.iter().find(|r| r.function == function).unwrap_or_else(|| panic!("no row {function}"))
}

fn within(value: f64, expected: f64, err: f64, k: f64) -> bool {
    (value - expected).abs() <= k * err.max(1e-15)
}

#[test]
fn gaussian_linear_function_is_extremal() {
    let inst = instantiate("classical_bl", 3, &Params::default()).unwrap();
    let rows = check_inequality(&inst, None, N, 17).unwrap();
    let r = row(&rows, "x1");
    assert!(within(r.lhs, 1.0, r.lhs_err, 4.0), "{r:?}");
    assert!((r.rhs - 1.0).abs() < 1e-12 && r.rhs_err < 1e-12);
    assert!(r.slack.abs() <= 4.0 * r.lhs_err);
    assert!(rows.iter().all(|r| r.status == Status::Pass));
}

#[test]
fn linearization_tends_to_variance() {
    let inst = instantiate("classical_bl", 2, &Params::default()).unwrap();
    let (samples, _) = draw_samples(&inst, 50_000, 3).unwrap();
    for f in default_suite(&inst, 3).unwrap() {
        let ratio = linearization_ratio(&f, &samples, 1e-3).unwrap();
        assert!((ratio - 1.0).abs() < 0.01, "{}: {ratio}", f.id);
    }
}

#[test]
fn muq_samples_pass_ks() {
    let (q, c) = (1.5, 2.0);
    let inst = instantiate("muq_lsi", 1, &params(r#"{"q": 1.5, "c": 2}"#)).unwrap();
    let (samples, _) = draw_samples(&inst, 20_000, 9).unwrap();
    // c x^q ~ Gamma(1/q, 1)
    let law = Gamma::new(1.0 / q, 1.0).unwrap();
    let mut t: Vec<f64> = samples.points.iter().map(|x| c * x[0].powf(q)).collect();
    t.sort_by(f64::total_cmp);
    let n = t.len() as f64;
    let ks = t
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let f = law.cdf(s);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 1.63 / n.sqrt(), "KS {ks}");
}

#[test]
fn poly_product_part_two_exponential() {
    // Var x = 1 and 4 E x^2 = 8 under exp(-x) on the half-line
    let inst = instantiate("poly_product", 1, &params(r#"{"part": 2}"#)).unwrap();
    let rows = check_inequality(&inst, None, N, 21).unwrap();
    let r = row(&rows, "x1");
    assert!(within(r.lhs, 1.0, r.lhs_err, 4.0), "{r:?}");
    assert!(within(r.rhs, 8.0, r.rhs_err, 4.0), "{r:?}");
}

#[test]
fn hardy_n0_on_the_ball() {
    // f = x1 on the unit ball in d = 6: Var = 1/8, interior 4/d^2 E|x|^2 = 1/12,
    // boundary 2/d int_sphere x1^2 dH / |ball| = 2/d
    let inst = instantiate("hardy_n0", 6, &Params::default()).unwrap();
    let rows = check_inequality(&inst, None, N, 5).unwrap();
    let r = row(&rows, "x1");
    assert!(within(r.lhs, 1.0 / 8.0, r.lhs_err, 4.0), "{r:?}");
    assert!(within(r.rhs, 1.0 / 12.0 + 1.0 / 3.0, r.rhs_err, 4.0), "{r:?}");
    assert_eq!(r.status, Status::Pass);
}

#[test]
fn payne_weinberger_ball_ratio() {
    // Var x1 = R^2/(d+2) against 2 R^2
    let d = 3;
    let inst = instantiate("payne_weinberger", d, &Params::default()).unwrap();
    let rows = check_inequality(&inst, None, N, 8).unwrap();
    let r = row(&rows, "x1");
    let expected = 1.0 / (2.0 * (d as f64 + 2.0));
    assert!(within(r.ratio(), expected, r.lhs_err / r.rhs, 4.0), "{}", r.ratio());
}

#[test]
fn refined_is_within_twice_classical() {
    let measure = r#"{"measure": {"kind": "product", "profile": {"kind": "quad_log_cosh", "a": 1, "b": 1, "shift": 0.2}}}"#;
    let classical = instantiate("classical_bl", 1, &params(measure)).unwrap();
    let refined = instantiate("refined_bl", 1, &params(measure)).unwrap();
    let a = check_inequality(&classical, None, 50_000, 4).unwrap();
    let b = check_inequality(&refined, None, 50_000, 4).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.function, rb.function);
        assert_eq!(ra.lhs, rb.lhs);
        assert!(rb.rhs <= 2.0 * ra.rhs + 1e-8, "{}: {} vs {}", ra.function, rb.rhs, ra.rhs);
    }
}

#[test]
fn spectral_gap_exceeds_curvature_floor() {
    // V'' = a + b sech^2 >= a, so the gap is at least a
    let profile = QuadLogCoshProfile { a: 1.0, b: 0.8, shift: 0.0 };
    let gap = spectral_gap_1d(&profile, (-12.0, 12.0), 2000).unwrap();
    assert!(gap.lambda1 >= 1.0 - 1e-4, "{gap:?}");
    assert!(gap.lambda1 <= 1.8 + 1e-4, "{gap:?}");
    let inst = instantiate("classical_bl", 1, &params(r#"{"measure": {"kind": "product", "profile": {"kind": "quad_log_cosh", "a": 1, "b": 0.8}}}"#)).unwrap();
    let rows = check_inequality(&inst, None, N, 2).unwrap();
    let r = row(&rows, "x1");
    assert!(r.lhs - 4.0 * r.lhs_err <= gap.poincare, "{} vs {}", r.lhs, gap.poincare);
    assert!(r.lhs - 4.0 * r.lhs_err <= r.rhs);
}

#[test]
fn dirichlet_suite_vanishes_on_boundary() {
    let inst = instantiate("hardy_dirichlet", 4, &Params::default()).unwrap();
    let suite = default_suite(&inst, 1).unwrap();
    let mut edge = Vector::zeros(4);
    edge[2] = 1.0;
    for f in &suite {
        assert!(f.eval(&edge).abs() < 1e-12, "{}", f.id);
    }
    let rows = check_inequality(&inst, Some(suite), 50_000, 1).unwrap();
    assert!(rows.iter().all(|r| r.status == Status::Pass), "{rows:?}");
}

#[test]
fn reports_are_reproducible() {
    let inst = instantiate("klartag_transfer", 2, &Params::default()).unwrap();
    let a = check_inequality(&inst, None, 20_000, 99).unwrap();
    let b = check_inequality(&inst, None, 20_000, 99).unwrap();
    assert_eq!(a, b);
    let c = check_inequality(&inst, None, 20_000, 100).unwrap();
    assert_ne!(a, c);
}
