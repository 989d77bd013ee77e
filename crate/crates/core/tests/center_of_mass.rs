//! Centers of mass: input parsing, flat closed forms and the mass field.

use finsler_core::bounds::mass_radius;
use finsler_core::centermass::{
    center_of_mass, mass_field, mass_field_jacobian, smallest_singular_value, MassDistribution,
};
use finsler_core::numeric::Matrix;
use finsler_core::{catalog, FinslerError};
use proptest::prelude::*;

#[test]
fn csv_rows_with_and_without_weights() {
    let plain = MassDistribution::from_csv("0,0\n2,0\n# comment\n1,3\n".as_bytes(), 2).unwrap();
    assert_eq!(plain.weights(), &[1.0 / 3.0; 3]);
    let weighted = MassDistribution::from_csv("0, 0, 0.25\n2, 0, 0.75\n".as_bytes(), 2).unwrap();
    assert_eq!(weighted.weights(), &[0.25, 0.75]);
    assert_eq!(weighted.points()[1], vec![2.0, 0.0]);
}

#[test]
fn malformed_csv_is_a_config_error() {
    for text in ["0,0,0.5\n1,1\n", "0,0,0.5\n1,1,0.2\n", "0,x\n", "1,2,3,4\n"] {
        let err = MassDistribution::from_csv(text.as_bytes(), 2).unwrap_err();
        assert!(err.is_config_error(), "{text:?}: {err}");
    }
    assert!(matches!(
        MassDistribution::new(vec![vec![0.0]], vec![0.5]),
        Err(FinslerError::InvalidParameter(_))
    ));
}

#[test]
fn euclidean_mass_field_is_weighted_offset() {
    let m = catalog::euclidean(2).unwrap();
    let d = MassDistribution::new(vec![vec![1.0, 0.0], vec![0.0, 2.0]], vec![0.25, 0.75]).unwrap();
    let v = mass_field(&m, &d, &[0.0, 0.0]).unwrap();
    assert!((v[0] + 0.25).abs() < 1e-12 && (v[1] + 1.5).abs() < 1e-12);
    let jac = mass_field_jacobian(&m, &d, &[0.3, 0.3], 1e-4).unwrap();
    assert!((jac - Matrix::identity(2, 2)).abs().max() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // geodesics are straight, so the center is the coordinate average
    // whatever the drift 1-form
    #[test]
    fn locally_minkowski_center_is_the_weighted_mean(
        pts in prop::collection::vec(prop::collection::vec(2.8f64..3.2, 2), 2..5),
        raw in prop::collection::vec(0.1f64..1.0, 5),
    ) {
        let m = catalog::berwald_torus(3.0).unwrap();
        let w: Vec<f64> = raw[..pts.len()].to_vec();
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mean = (0..2)
            .map(|i| pts.iter().zip(&w).map(|(p, wi)| wi * p[i]).sum::<f64>())
            .collect::<Vec<_>>();
        let d = MassDistribution::renormalized(pts.clone(), w).unwrap();
        let c = center_of_mass(&m, &d, &pts[0], 1e-12, 100).unwrap();
        prop_assert!((c.point[0] - mean[0]).abs() + (c.point[1] - mean[1]).abs() < 1e-10);
    }
}

#[test]
fn regime_flag_compares_support_to_guaranteed_radius() {
    let m = catalog::sphere_stereographic().unwrap();
    let rad = mass_radius(2, 1.0, 1.0, std::f64::consts::PI);
    let near = MassDistribution::uniform(vec![vec![0.0, 0.0], vec![0.002, 0.0]]).unwrap();
    let mut c = center_of_mass(&m, &near, &[0.0, 0.0], 1e-12, 100).unwrap();
    c.flag_regime(rad);
    assert_eq!(c.outside_guaranteed_regime, Some(false));
    assert!((c.point[0] - 0.001).abs() < 1e-9);
    let far = MassDistribution::uniform(vec![vec![0.0, 0.0], vec![0.2, 0.0]]).unwrap();
    let mut c = center_of_mass(&m, &far, &[0.0, 0.0], 1e-12, 100).unwrap();
    c.flag_regime(rad);
    assert_eq!(c.outside_guaranteed_regime, Some(true));
    let jac = mass_field_jacobian(&m, &far, &c.point, 1e-4).unwrap();
    assert!(smallest_singular_value(&jac) > 0.5);
}

#[test]
fn iteration_budget_is_enforced() {
    let m = catalog::sphere_stereographic().unwrap();
    let d =
        MassDistribution::uniform(vec![vec![0.0, 0.0], vec![0.3, 0.1], vec![-0.1, 0.2]]).unwrap();
    assert!(matches!(
        center_of_mass(&m, &d, &[0.4, 0.4], 1e-14, 1),
        Err(FinslerError::MaxIterExceeded { .. })
    ));
}
