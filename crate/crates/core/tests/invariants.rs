//! Sampled invariants against grid oracles and known values.

use std::f64::consts::{PI, SQRT_2, TAU};

use finsler_core::catalog;
use finsler_core::invariants::{
    curvature_bounds, diameter_estimate, invariant_report, reversibility, uniformity,
    InvariantSettings,
};
use finsler_core::metric::measure::VolumeMeasure;
use finsler_core::report::to_json_string;

/// g_y(v, v) for F = |y| + β y¹, from g = (F/α)(I − ŷŷᵀ) + (ŷ + b)(ŷ + b)ᵀ.
fn randers_quadratic(beta: f64, y_angle: f64, v: [f64; 2]) -> f64 {
    let yh = [y_angle.cos(), y_angle.sin()];
    let f = 1.0 + beta * yh[0];
    let along = yh[0] * v[0] + yh[1] * v[1];
    let tilt = (yh[0] + beta) * v[0] + yh[1] * v[1];
    f * (v[0] * v[0] + v[1] * v[1] - along * along) + tilt * tilt
}

#[test]
fn berwald_torus_uniformity_matches_grid_oracle() {
    let beta = 0.5;
    let nodes = 720;
    let angle = |i: usize| TAU * i as f64 / nodes as f64;
    let mut oracle = 0.0f64;
    for i in 0..nodes {
        let v = [angle(i).cos(), angle(i).sin()];
        let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
        for j in 0..nodes {
            let q = randers_quadratic(beta, angle(j), v);
            hi = hi.max(q);
            lo = lo.min(q);
        }
        oracle = oracle.max(hi / lo);
    }
    let m = catalog::berwald_torus(2.0).unwrap();
    let est = uniformity(&m, 300, 7).unwrap();
    assert!(
        (est / oracle - 1.0).abs() < 0.02,
        "estimate {est}, oracle {oracle}"
    );
}

#[test]
fn reversibility_of_catalog_models() {
    assert_eq!(
        reversibility(&catalog::sphere_stereographic().unwrap(), 50, 0).unwrap(),
        1.0
    );
    let lam = reversibility(&catalog::berwald_torus(3.0).unwrap(), 100, 0).unwrap();
    assert!((lam - 5.0).abs() < 1e-6);
    // b = ε(sin x², cos x¹) has largest norm √2 ε
    let eps: f64 = 0.3;
    let peak = (1.0 + SQRT_2 * eps) / (1.0 - SQRT_2 * eps);
    let est = reversibility(&catalog::randers_nonparallel(eps).unwrap(), 200, 0).unwrap();
    assert!(est <= peak + 1e-9 && est > 0.98 * peak, "{est} vs {peak}");
}

#[test]
fn round_sphere_has_unit_curvature() {
    for m in [
        catalog::sphere_stereographic().unwrap(),
        catalog::sphere_polar().unwrap(),
    ] {
        let [lo, hi] = curvature_bounds(&m, 40, 3).unwrap();
        assert!(
            (lo - 1.0).abs() < 1e-5 && (hi - 1.0).abs() < 1e-5,
            "{}: [{lo}, {hi}]",
            m.name()
        );
    }
}

#[test]
fn volumes_of_closed_surfaces() {
    let sphere = catalog::sphere_polar().unwrap();
    // second-order midpoint rule in θ
    for measure in [VolumeMeasure::Bh, VolumeMeasure::Ht] {
        let coarse = (sphere.volume(measure, 64).unwrap() / (4.0 * PI) - 1.0).abs();
        let fine = (sphere.volume(measure, 128).unwrap() / (4.0 * PI) - 1.0).abs();
        assert!(coarse < 5e-4 && fine < 0.3 * coarse, "{coarse} {fine}");
    }
    // Busemann–Hausdorff shrinks the Randers torus by √(1 − β²)
    let bt = catalog::berwald_torus(2.0).unwrap();
    let bh = bt.volume(VolumeMeasure::Bh, 64).unwrap();
    assert!((bh - 4.0 * PI * PI * (1.0f64 - 0.25).powf(1.5)).abs() < 1e-6 * bh);
}

#[test]
fn flat_torus_diameter_converges_to_half_diagonal() {
    let m = catalog::flat_torus().unwrap();
    let d = diameter_estimate(&m, 48).unwrap();
    assert!((d - PI * SQRT_2).abs() < 1e-9, "{d}");
    assert!(diameter_estimate(&m, 2).is_err());
}

#[test]
fn invariant_report_is_reproducible() {
    let m = catalog::berwald_torus(2.0).unwrap();
    let s = InvariantSettings {
        samples: 40,
        grid_resolution: 16,
        volume_order: 32,
        ..InvariantSettings::default()
    };
    let a = to_json_string(&invariant_report(&m, &s).unwrap()).unwrap();
    let b = to_json_string(&invariant_report(&m, &s).unwrap()).unwrap();
    assert_eq!(a, b);
    let r = invariant_report(&m, &s).unwrap();
    assert_eq!(r.closed_geodesic.as_ref().unwrap().class, vec![-1, 0]);
    assert!((r.injectivity.loop_bound.value() - PI / 4.0).abs() < 1e-12);
}
