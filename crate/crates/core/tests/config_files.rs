//! Metric config files: parse, build, round-trip.

use finsler_core::config::{load_metric, MetricConfig, MetricKind};

const EXAMPLES: &[&str] = &[
    r#"{"kind": "sphere"}"#,
    r#"{"kind": "sphere_polar"}"#,
    r#"{"kind": "flat_torus"}"#,
    r#"{"kind": "euclidean", "dim": 3}"#,
    r#"{"kind": "berwald_torus", "params": {"n": 4}}"#,
    r#"{"kind": "randers_nonparallel", "params": {"epsilon": 0.2}}"#,
    r#"{"kind": "perturbed_torus", "params": {"delta": 0.1, "b0": 0.2}}"#,
    r#"{"kind": "riemannian", "dim": 2, "params": {"a": [2, 0.5, 0.5, 1]}}"#,
    r#"{"kind": "randers", "dim": 2, "params": {"a": [1, 0, 0, 1], "b": [0.3, 0.1]}, "periodicity": [6.283185307179586, null]}"#,
];

#[test]
fn every_example_builds_and_round_trips() {
    for text in EXAMPLES {
        let cfg = MetricConfig::from_json(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        let model = cfg.build().unwrap_or_else(|e| panic!("{text}: {e}"));
        assert!(
            model
                .eval_f(&vec![0.1; model.dim()], &vec![1.0; model.dim()])
                .unwrap()
                > 0.0
        );
        let again = MetricConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }
}

#[test]
fn presets_match_catalog_names() {
    let m = MetricConfig::preset(MetricKind::FlatTorus).build().unwrap();
    assert_eq!(m.name(), "flat_torus");
}

#[test]
fn bad_files_are_config_errors() {
    let dir = std::env::temp_dir().join(format!("finsler-config-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases = [
        ("missing.json", None),
        ("syntax.json", Some("{\"kind\": ")),
        ("unknown_kind.json", Some(r#"{"kind": "klein_bottle"}"#)),
        (
            "stray_param.json",
            Some(r#"{"kind": "flat_torus", "params": {"n": 2}}"#),
        ),
        (
            "long_form.json",
            Some(r#"{"kind": "randers", "dim": 2, "params": {"a": [1, 0, 0, 1], "b": [1.5, 0]}}"#),
        ),
    ];
    for (name, body) in cases {
        let path = dir.join(name);
        if let Some(b) = body {
            std::fs::write(&path, b).unwrap();
        }
        let err = load_metric(&path).unwrap_err();
        assert!(err.is_config_error(), "{name}: {err}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
