//! End-to-end runs of the `finsler` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn finsler(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("sphere.json", r#"{"kind": "sphere"}"#),
        ("polar.json", r#"{"kind": "sphere_polar"}"#),
        ("euclidean.json", r#"{"kind": "euclidean", "dim": 2}"#),
        (
            "bt2.json",
            r#"{"kind": "berwald_torus", "params": {"n": 2}}"#,
        ),
        ("two.csv", "0,0\n2,0\n"),
        ("bad.json", r#"{"kind": "sphere", "colour": "blue"}"#),
    ];
    for (name, body) in files {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

#[test]
fn injectivity_bound_from_flags() {
    let dir = workspace();
    let out = finsler(
        &[
            "bounds",
            "thm1.1",
            "--n",
            "2",
            "--k",
            "1",
            "--tau",
            "0",
            "--Lambda",
            "1",
            "--D",
            "3.141592653589793",
            "--V",
            "39.47841760435743",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out)["result"]["value"].as_f64().unwrap();
    assert!((v - 0.854_604_480_695).abs() < 1e-9, "{v}");
}

#[test]
fn karcher_midpoint() {
    let dir = workspace();
    let out = finsler(
        &[
            "karcher",
            "--metric",
            "euclidean.json",
            "--points",
            "two.csv",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    let c: Vec<f64> = doc["result"]["center"]["point"]
        .as_array()
        .expect("center coordinates")
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((c[0] - 1.0).abs() < 1e-10 && c[1].abs() < 1e-10, "{c:?}");
}

#[test]
fn verify_sphere_passes() {
    let dir = workspace();
    let out = finsler(
        &[
            "verify",
            "--suite",
            "appendixA",
            "--metric",
            "sphere.json",
            "--samples",
            "8",
            "--seed",
            "7",
            "--k-used",
            "1",
            "--Lambda-used",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(json(&out)["result"]["total_violations"], 0);
}

#[test]
fn violations_exit_with_one() {
    let dir = workspace();
    let out = finsler(
        &[
            "verify",
            "--suite",
            "appendixA",
            "--metric",
            "sphere.json",
            "--samples",
            "5",
            "--checks",
            "rauch",
            "--k-used",
            "0.5",
            "--Lambda-used",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["result"]["total_violations"].as_u64().unwrap() > 0);
}

#[test]
fn malformed_config_exits_two_and_writes_nothing() {
    let dir = workspace();
    let out = finsler(
        &["volume", "--metric", "bad.json", "-o", "out.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out.json").exists());

    std::fs::write(
        dir.path().join("run.json"),
        r#"{"command": "volume", "metric": "sphere.json", "order": 8, "extra": 1}"#,
    )
    .unwrap();
    let out = finsler(
        &["volume", "--config", "run.json", "-o", "out.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out.json").exists());

    let out = finsler(&["bounds", "no_such_bound"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = finsler(&["bounds", "thm1.1", "--n", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = workspace();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"command": "volume", "metric": "bt2.json", "measure": "bh"}"#,
    )
    .unwrap();
    let out = finsler(
        &[
            "volume", "--config", "run.json", "--order", "32", "-o", "vol.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("vol.json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["order"], 32);
    assert_eq!(doc["config"]["measure"], "bh");
    assert_eq!(doc["metric_config"]["kind"], "berwald_torus");
    let v = doc["result"]["value"].as_f64().unwrap();
    let expected = 4.0 * std::f64::consts::PI.powi(2) * 0.75f64.powf(1.5);
    assert!((v - expected).abs() < 1e-6 * expected);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = workspace();
    let args = [
        "invariants",
        "--metric",
        "bt2.json",
        "--samples",
        "30",
        "--grid-resolution",
        "12",
        "--volume-order",
        "16",
    ];
    let a = finsler(&args, dir.path());
    let b = finsler(&args, dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_and_json_report_the_same_fields() {
    let dir = workspace();
    let j = json(&finsler(
        &["volume", "--metric", "polar.json", "--order", "16"],
        dir.path(),
    ));
    let csv = finsler(
        &[
            "volume",
            "--metric",
            "polar.json",
            "--order",
            "16",
            "--format",
            "csv",
        ],
        dir.path(),
    );
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("field,value"));
    let mut seen = 0;
    for line in lines {
        let (field, value) = line.split_once(',').unwrap();
        if !field.starts_with("result.") {
            continue;
        }
        let key = &field["result.".len()..];
        let expected = &j["result"][key];
        match expected {
            Value::Number(n) => assert_eq!(
                value.parse::<f64>().unwrap(),
                n.as_f64().unwrap(),
                "{field}"
            ),
            Value::String(s) => assert_eq!(value, s),
            other => panic!("unexpected {other}"),
        }
        seen += 1;
    }
    assert_eq!(seen, j["result"].as_object().unwrap().len());
}

#[test]
fn invariants_of_flat_models() {
    let dir = workspace();
    let e = json(&finsler(
        &[
            "invariants",
            "--metric",
            "euclidean.json",
            "--samples",
            "20",
        ],
        dir.path(),
    ));
    assert_eq!(e["result"]["lambda_hat"], 1.0);
    // the unit square is the reference domain
    let diam = e["result"]["diam_hat"].as_f64().unwrap();
    assert!((diam - std::f64::consts::SQRT_2).abs() < 1e-12);
    let t = json(&finsler(
        &[
            "invariants",
            "--metric",
            "bt2.json",
            "--samples",
            "40",
            "--grid-resolution",
            "12",
        ],
        dir.path(),
    ));
    let lam = t["result"]["lambda_hat"].as_f64().unwrap();
    assert!((lam - 3.0).abs() < 1e-6);
    assert_eq!(
        t["result"]["closed_geodesic"]["class"],
        serde_json::json!([-1, 0])
    );
}
