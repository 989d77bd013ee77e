//! Geodesics, parallel transport and Jacobi fields against closed forms on
//! the round sphere and flat tori.

use std::f64::consts::PI;

use finsler_core::flows::{DEFAULT_SHOOTING_ITERATIONS, DEFAULT_SHOOTING_TOL};
use finsler_core::numeric::{Matrix, Vector};
use finsler_core::{catalog, MetricModel};
use proptest::prelude::*;

fn to_sphere(u: &[f64]) -> [f64; 3] {
    let r2 = u[0] * u[0] + u[1] * u[1];
    let d = 1.0 + r2;
    [2.0 * u[0] / d, 2.0 * u[1] / d, (1.0 - r2) / d]
}

fn great_circle(u: &[f64], v: &[f64]) -> f64 {
    let (a, b) = (to_sphere(u), to_sphere(v));
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
        .clamp(-1.0, 1.0)
        .acos()
}

fn g_norm(m: &MetricModel, x: &[f64], y: &[f64], v: &[f64]) -> f64 {
    let g: Matrix = m.fundamental_tensor(x, y).unwrap();
    let v = Vector::from_column_slice(v);
    v.dot(&(g * &v)).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sphere_distance_matches_great_circles(
        p in prop::collection::vec(-0.5f64..0.5, 2),
        q in prop::collection::vec(-0.5f64..0.5, 2),
    ) {
        let m = catalog::sphere_stereographic().unwrap();
        let d = m.distance(&p, &q, 1e-12).unwrap();
        prop_assert!((d - great_circle(&p, &q)).abs() <= 1e-8);
    }

    #[test]
    fn exp_inverse_inverts_exp(
        x in prop::collection::vec(0.0f64..6.0, 2),
        angle in 0.0f64..std::f64::consts::TAU,
        len in 0.05f64..0.8,
    ) {
        let m = catalog::randers_nonparallel(0.3).unwrap();
        let v = [len * angle.cos(), len * angle.sin()];
        let q = m.exp_map(&x, &v).unwrap().coords;
        let back = m.exp_inverse(&x, &q, DEFAULT_SHOOTING_TOL, DEFAULT_SHOOTING_ITERATIONS).unwrap();
        prop_assert!((back[0] - v[0]).abs() + (back[1] - v[1]).abs() <= 1e-8);
    }

    #[test]
    fn transport_preserves_reference_inner_products(
        x in prop::collection::vec(0.0f64..6.0, 2),
        angle in 0.0f64..std::f64::consts::TAU,
        w in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        prop_assume!(w[0].abs() + w[1].abs() > 0.1);
        let m = catalog::randers_nonparallel(0.4).unwrap();
        let y = [angle.cos(), angle.sin()];
        let geo = m.integrate_geodesic(&x, &y, 1.5, 300).unwrap();
        let frame = m.parallel_transport(&geo, &w).unwrap();
        let start = g_norm(&m, &x, &y, &w);
        let end = g_norm(&m, geo.end_position(), geo.end_velocity(), frame.end());
        prop_assert!((start - end).abs() <= 1e-8 * start);
        prop_assert!(geo.speed_drift(&m) <= 1e-9);
    }
}

#[test]
fn sphere_jacobi_field_is_a_sine() {
    let m = catalog::sphere_stereographic().unwrap();
    let x = [0.1, 0.2];
    let c = 2.0 / (1.0 + 0.05);
    let y = [1.0 / c, 0.0];
    let e = [0.0, 1.0 / c];
    let geo = m.integrate_geodesic(&x, &y, 3.0, 600).unwrap();
    let sol = m.jacobi_field(&geo, &[0.0, 0.0], &e).unwrap();
    for (i, t) in sol.geodesic.t_grid.iter().enumerate().step_by(50) {
        let (xt, vt) = (&sol.geodesic.xs[i], &sol.geodesic.vs[i]);
        let len = g_norm(&m, xt, vt, &sol.j[i]);
        let dlen = g_norm(&m, xt, vt, &sol.jp[i]);
        assert!((len - t.sin()).abs() < 1e-8, "t={t}: |J|={len}");
        assert!((dlen - t.cos().abs()).abs() < 1e-7, "t={t}: |J'|={dlen}");
    }
}

#[test]
fn berwald_torus_geodesics_are_straight() {
    let m = catalog::berwald_torus(3.0).unwrap();
    let geo = m
        .integrate_geodesic(&[1.0, 1.0], &[0.3, -0.7], 2.0, 50)
        .unwrap();
    let end = geo.end_position();
    assert!((end[0] - 1.6).abs() < 1e-13 && (end[1] + 0.4).abs() < 1e-13);
    // forward distance is F of the displacement, so it differs from the backward one
    let d = m.distance(&[1.0, 1.0], &[1.5, 1.0], 1e-12).unwrap();
    let back = m.distance(&[1.5, 1.0], &[1.0, 1.0], 1e-12).unwrap();
    assert!((d - 0.5 * (1.0 + 2.0 / 3.0)).abs() < 1e-10);
    assert!((back - 0.5 / 3.0).abs() < 1e-10);
}

#[test]
fn flat_transport_is_trivial() {
    let m = catalog::flat_torus().unwrap();
    let geo = m
        .integrate_geodesic(&[0.0, 0.0], &[0.6, 0.8], PI, 100)
        .unwrap();
    let frame = m.parallel_transport(&geo, &[0.3, 1.1]).unwrap();
    assert_eq!(frame.end(), &[0.3, 1.1]);
}

#[test]
fn exp_differential_is_identity_at_origin() {
    let m = catalog::sphere_stereographic().unwrap();
    let d = m.exp_differential(&[0.2, 0.0], &[1e-9, 0.0]).unwrap();
    assert!((d - Matrix::identity(2, 2)).abs().max() < 1e-6);
}
