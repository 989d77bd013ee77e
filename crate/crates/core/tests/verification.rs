//! Comparison checks: they pass with valid constants, detect violations
//! when the constants are wrong, and gate Berwald-only inequalities.

use finsler_core::report::to_json_string;
use finsler_core::verify::{
    check_curvature_operator_norm, check_distance_comparison, check_holonomy_quadratic,
    check_polarized_curvature, check_rauch, check_s_curvature_constancy, run_suite, CheckSettings,
    SuiteConfig, SuiteName,
};
use finsler_core::{catalog, FinslerError};

fn few(samples: usize) -> CheckSettings {
    CheckSettings::with_samples(samples, 13)
}

#[test]
fn underestimated_curvature_is_caught() {
    let sphere = catalog::sphere_stereographic().unwrap();
    let rauch = check_rauch(&sphere, 0.5, &few(10)).unwrap();
    assert!(rauch.violations > 0 && rauch.worst_margin.value() < 0.0);
    let op = check_curvature_operator_norm(&sphere, 0.5, &few(10)).unwrap();
    assert!(op.violations > 0);
    let pol = check_polarized_curvature(&sphere, 0.2, 1.0, &few(10)).unwrap();
    assert!(pol.violations > 0);
}

#[test]
fn overestimated_curvature_still_passes() {
    let sphere = catalog::sphere_stereographic().unwrap();
    assert!(check_curvature_operator_norm(&sphere, 2.0, &few(10))
        .unwrap()
        .passed());
    let d = check_distance_comparison(&sphere, 1.0, 1.0, 0.3, &few(10)).unwrap();
    assert!(d.passed(), "{d:?}");
}

#[test]
fn holonomy_scale_gate() {
    let sphere = catalog::sphere_stereographic().unwrap();
    let err = check_holonomy_quadratic(&sphere, &[0.5, 0.1], 2, 1.0, 1.0, &few(10)).unwrap_err();
    assert!(matches!(err, FinslerError::InvalidParameter(_)));
    let flat = check_holonomy_quadratic(
        &catalog::flat_torus().unwrap(),
        &[0.2, 0.1],
        2,
        0.0,
        1.0,
        &few(10),
    )
    .unwrap();
    assert!(flat.passed());
    assert!(flat.extras["max_defect"].value() < 1e-8);
}

#[test]
fn distortion_is_constant_on_berwald_models_only() {
    let bt = check_s_curvature_constancy(&catalog::berwald_torus(2.0).unwrap(), &few(10)).unwrap();
    assert!(bt.passed() && bt.applicable);
    let np =
        check_s_curvature_constancy(&catalog::randers_nonparallel(0.3).unwrap(), &few(10)).unwrap();
    assert!(!np.applicable && np.violations == 0);
}

#[test]
fn berwald_suite_is_not_applicable_to_nonparallel_randers() {
    let m = catalog::randers_nonparallel(0.2).unwrap();
    let cfg = SuiteConfig {
        suite: SuiteName::AppendixB,
        settings: few(8),
        ..SuiteConfig::default()
    };
    let report = run_suite(&m, &cfg).unwrap();
    assert_eq!(report.total_violations, 0);
    let gated: Vec<_> = report
        .reports
        .iter()
        .filter(|r| !r.applicable)
        .map(|r| r.check_name.as_str())
        .collect();
    assert!(
        gated.contains(&"polarized_curvature") && gated.contains(&"holonomy_quadratic"),
        "{gated:?}"
    );
}

#[test]
fn suite_reports_are_reproducible() {
    let m = catalog::sphere_stereographic().unwrap();
    let cfg = SuiteConfig {
        suite: SuiteName::AppendixA,
        k_used: Some(1.0),
        lambda_used: Some(1.0),
        settings: few(6),
        checks: Some(vec!["rauch".into(), "eta_bound".into()]),
        ..SuiteConfig::default()
    };
    let a = to_json_string(&run_suite(&m, &cfg).unwrap()).unwrap();
    let b = to_json_string(&run_suite(&m, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let parsed: SuiteConfig =
        serde_json::from_str(r#"{"suite": "appendixA", "settings": {"samples": 6}}"#).unwrap();
    assert_eq!(parsed.settings.samples, 6);
    assert!(serde_json::from_str::<SuiteConfig>(r#"{"suite": "appendixA", "sample": 6}"#).is_err());
}

#[test]
fn unknown_check_names_are_rejected() {
    let cfg = SuiteConfig {
        checks: Some(vec!["no_such_check".into()]),
        ..SuiteConfig::default()
    };
    assert!(run_suite(&catalog::flat_torus().unwrap(), &cfg).is_err());
}
