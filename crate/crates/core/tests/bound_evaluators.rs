//! Closed-form bound evaluators against hand-derived formulas, plus
//! monotonicity properties in their parameters.

use std::f64::consts::PI;

use finsler_core::bounds::{
    c0, mass_radius, remark4_3_v, s_k, t_frak, thm1_1_injectivity_bound, thm3_6_length_bound,
    thm4_2_convexity_bound,
};
use proptest::prelude::*;

/// min of the conjugate and volume arms for n = 2 and n = 3 with k > 0, from
/// antiderivatives of sinh.
fn injectivity_oracle(n: usize, k: f64, tau: f64, lam: f64, d: f64, v: f64) -> f64 {
    let a = k.sqrt();
    let sl = lam.sqrt();
    let (area, bracket) = match n {
        2 => (
            2.0,
            (a * d).sinh() / a + sl * tau * ((a * d).cosh() - 1.0) / k,
        ),
        3 => (
            2.0 * PI,
            ((a * d).sinh() / a).powi(2) / 2.0
                + sl * tau * ((2.0 * a * d).sinh() / (4.0 * a) - d / 2.0) / k,
        ),
        _ => unreachable!(),
    };
    let conj = (1.0 + 1.0 / sl) * PI / a;
    let vol = v / (area * lam.powf(1.5 * n as f64) * bracket);
    conj.min(vol) / (1.0 + sl)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let below = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn injectivity_bound_for_round_torus_data() {
    let r = thm1_1_injectivity_bound(2, 1.0, 0.0, 1.0, PI, 4.0 * PI * PI).unwrap();
    let expected = PI * PI / PI.sinh();
    assert!((r.value() - expected).abs() < 1e-12);
    assert!((r.arm("conjugate").unwrap() - PI).abs() < 1e-12);
    assert!((r.value() - 0.854_604_480_695).abs() < 1e-11);
}

#[test]
fn flat_bound_has_no_conjugate_arm() {
    let r = thm1_1_injectivity_bound(2, 0.0, 0.0, 1.0, 2.0, 1.0).unwrap();
    assert!(r.arm("conjugate").unwrap().is_infinite());
    // V/(2·D) scaled by 1/2
    assert!((r.value() - 0.125).abs() < 1e-14);
}

#[test]
fn convexity_bound_arms() {
    let r = thm4_2_convexity_bound(4.0, 1.0, 2.0).unwrap();
    assert!((r.arm("curvature").unwrap() - PI / 4.0).abs() < 1e-15);
    assert!((r.arm("injectivity").unwrap() - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(r.value(), 1.0 / 6.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(thm1_1_injectivity_bound(1, 1.0, 0.0, 1.0, 1.0, 1.0).is_err());
    assert!(thm1_1_injectivity_bound(2, -1.0, 0.0, 1.0, 1.0, 1.0).is_err());
    assert!(thm1_1_injectivity_bound(2, 1.0, 0.0, 0.5, 1.0, 1.0).is_err());
    assert!(thm4_2_convexity_bound(1.0, 0.0, 1.0).is_err());
    assert!(mass_radius(2, 1.0, 0.5, 1.0).is_nan());
}

#[test]
fn c0_at_unit_constants() {
    let oracle = bisect(|t| (3.0 * t).sinh() / (3.0 * t) - 2.0, 0.1, 2.0);
    assert!((c0(1.0, 1.0) - oracle).abs() < 1e-8);
    assert!(c0(0.0, 1.0).is_infinite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn injectivity_bound_matches_closed_form(
        n in 2usize..=3,
        k in 0.01f64..4.0,
        tau in 0.0f64..2.0,
        lam in 1.0f64..4.0,
        d in 0.1f64..4.0,
        v in 0.1f64..50.0,
    ) {
        let r = thm1_1_injectivity_bound(n, k, tau, lam, d, v).unwrap();
        let oracle = injectivity_oracle(n, k, tau, lam, d, v);
        prop_assert!((r.value() - oracle).abs() <= 1e-10 * oracle.max(1e-300));
    }

    #[test]
    fn reports_recombine_to_their_value(k in 0.0f64..4.0, lam in 1.0f64..4.0, d in 0.1f64..4.0) {
        let a = thm1_1_injectivity_bound(2, k, 0.3, lam, d, 10.0).unwrap();
        let b = thm4_2_convexity_bound(k, d, lam).unwrap();
        let c = thm3_6_length_bound(3, k, 0.3, lam, d, 10.0).unwrap();
        for r in [a, b, c] {
            prop_assert_eq!(r.recombined(), r.value());
        }
    }

    #[test]
    fn injectivity_bound_is_monotone(
        k in 0.0f64..3.0,
        lam in 1.0f64..3.0,
        d in 0.2f64..3.0,
        v in 0.5f64..20.0,
        bump in 1.01f64..2.0,
    ) {
        let base = thm1_1_injectivity_bound(2, k, 0.2, lam, d, v).unwrap().value();
        prop_assert!(thm1_1_injectivity_bound(2, k, 0.2, lam * bump, d, v).unwrap().value() <= base);
        prop_assert!(thm1_1_injectivity_bound(2, k * bump, 0.2, lam, d, v).unwrap().value() <= base);
        prop_assert!(thm1_1_injectivity_bound(2, k, 0.2, lam, d * bump, v).unwrap().value() <= base);
        prop_assert!(thm1_1_injectivity_bound(2, k, 0.2 * bump, lam, d, v).unwrap().value() <= base);
        prop_assert!(thm1_1_injectivity_bound(2, k, 0.2, lam, d, v * bump).unwrap().value() >= base);
    }

    #[test]
    fn comparison_function_is_continuous_in_curvature(t in 0.0f64..3.0) {
        let flat = s_k(0.0, t);
        prop_assert!((s_k(1e-8, t) - flat).abs() <= 1e-7);
        prop_assert!((s_k(-1e-8, t) - flat).abs() <= 1e-7);
        prop_assert!((flat - t).abs() <= 1e-15);
    }

    #[test]
    fn comparison_function_closed_forms(k in 0.01f64..4.0, t in 0.0f64..1.5) {
        let a = k.sqrt();
        prop_assert!((s_k(k, t) - (a * t).sin() / a).abs() <= 1e-13);
        prop_assert!((s_k(-k, t) - (a * t).sinh() / a).abs() <= 1e-12 * (1.0 + (a * t).sinh() / a));
    }

    #[test]
    fn focal_time_closed_form(k in 0.01f64..4.0, xi in -3.0f64..3.0) {
        // cos(√k t) = ξ sin(√k t)/√k
        let a = k.sqrt();
        let mut expected = (a / xi).atan() / a;
        if expected < 0.0 {
            expected += PI / a;
        }
        prop_assert!((remark4_3_v(k, xi) - expected).abs() <= 1e-10);
    }

    #[test]
    fn mass_radius_shrinks_with_uniformity(
        k in 0.0f64..3.0,
        lam in 1.0f64..5.0,
        sigma in 0.1f64..3.0,
        bump in 1.0f64..3.0,
    ) {
        prop_assert!(mass_radius(2, k, lam * bump, sigma) <= mass_radius(2, k, lam, sigma));
        prop_assert!(t_frak(k + 0.01, lam * bump) <= t_frak(k + 0.01, lam));
    }

    #[test]
    fn c0_matches_bisection(k in 0.05f64..4.0, lam in 1.0f64..2.0) {
        let a = 3.0 * lam.powf(2.5);
        let b = k.sqrt();
        let oracle = bisect(|t| (b * a * t).sinh() / (b * a * t) - 2.0, 1e-9, 10.0 / (a * b));
        prop_assert!((c0(k, lam) - oracle).abs() <= 1e-8 * oracle.max(1.0));
    }
}
