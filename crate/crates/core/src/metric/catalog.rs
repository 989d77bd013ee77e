//! Built-in metrics.

use std::f64::consts::{PI, TAU};

use crate::error::{FinslerError, Result};
use crate::numeric::Matrix;

use super::{Chart, CoefficientField, MetricForm, MetricModel, ModelFlags, NormFn};

const RIEMANNIAN_FLAGS: ModelFlags = ModelFlags {
    claimed_berwald: true,
    claimed_reversible: true,
};

fn identity(n: usize) -> CoefficientField {
    CoefficientField::constant_matrix(&Matrix::identity(n, n))
}

/// Flat ℝⁿ with the unit cube as its reference domain.
pub fn euclidean(n: usize) -> Result<MetricModel> {
    if n == 0 {
        return Err(FinslerError::InvalidParameter(
            "dimension must be positive".into(),
        ));
    }
    let unit = vec![(0.0, 1.0); n];
    let chart = Chart::new(vec![None; n], Some(unit.clone()), unit, f64::INFINITY)?;
    MetricModel::new(
        format!("euclidean({n})"),
        chart,
        MetricForm::Randers {
            a: identity(n),
            b: None,
        },
        RIEMANNIAN_FLAGS,
    )
}

/// Riemannian metric with a user-supplied matrix field.
pub fn riemannian(
    name: impl Into<String>,
    chart: Chart,
    a: CoefficientField,
) -> Result<MetricModel> {
    MetricModel::new(
        name,
        chart,
        MetricForm::Randers { a, b: None },
        RIEMANNIAN_FLAGS,
    )
}

/// Randers metric `√(a(y,y)) + b(y)`; rejects `‖b‖_a ≥ 1` on the sample box.
pub fn randers(
    name: impl Into<String>,
    chart: Chart,
    a: CoefficientField,
    b: CoefficientField,
    claimed_berwald: bool,
) -> Result<MetricModel> {
    MetricModel::new(
        name,
        chart,
        MetricForm::Randers { a, b: Some(b) },
        ModelFlags {
            claimed_berwald,
            claimed_reversible: false,
        },
    )
}

/// A metric known only through F; all tensors come from finite differences.
pub fn general(
    name: impl Into<String>,
    chart: Chart,
    f: NormFn,
    flags: ModelFlags,
) -> Result<MetricModel> {
    MetricModel::new(name, chart, MetricForm::General(f), flags)
}

/// Product of two unit circles: the flat torus with periods (2π, 2π).
pub fn flat_torus() -> Result<MetricModel> {
    riemannian("flat_torus", Chart::torus(&[TAU, TAU], 2.0), identity(2))
}

/// Unit 2-sphere in polar coordinates (θ, φ), metric diag(1, sin²θ).
/// Sampling stays 0.6 away from the poles.
pub fn sphere_polar() -> Result<MetricModel> {
    let chart = Chart::new(
        vec![None, Some(TAU)],
        Some(vec![(0.0, PI), (0.0, TAU)]),
        vec![(0.6, PI - 0.6), (0.0, TAU)],
        0.5,
    )?;
    riemannian(
        "sphere_polar",
        chart,
        CoefficientField::function(4, |x| {
            let s = x[0].sin();
            vec![1.0, 0.0, 0.0, s * s]
        }),
    )
}

/// Unit 2-sphere in stereographic coordinates: the origin is a pole and
/// |u| = 1 is the equator; g = 4/(1+|u|²)² δ.
pub fn sphere_stereographic() -> Result<MetricModel> {
    let chart = Chart::new(vec![None, None], None, vec![(-0.5, 0.5), (-0.5, 0.5)], 1.6)?;
    riemannian(
        "sphere",
        chart,
        CoefficientField::function(4, |u| {
            let c = 2.0 / (1.0 + u[0] * u[0] + u[1] * u[1]);
            let c2 = c * c;
            vec![c2, 0.0, 0.0, c2]
        }),
    )
}

/// The parallel-Randers torus: flat α on periods (2π, 2π) plus
/// β = (1 − 1/n) dx¹. Berwald, flat, with reversibility 2n − 1.
pub fn berwald_torus(n: f64) -> Result<MetricModel> {
    if !(n >= 1.0) {
        return Err(FinslerError::InvalidParameter(format!(
            "berwald_torus parameter must be at least 1, got {n}"
        )));
    }
    let beta = 1.0 - 1.0 / n;
    let safe = PI / (n * n);
    randers(
        format!("berwald_torus({n})"),
        Chart::torus(&[TAU, TAU], safe),
        identity(2),
        CoefficientField::Constant(vec![beta, 0.0]),
        true,
    )
}

/// Flat α on the torus with the non-closed 1-form b = ε(sin x², cos x¹):
/// a Randers metric that is not Berwald.
pub fn randers_nonparallel(epsilon: f64) -> Result<MetricModel> {
    if !(epsilon.abs() < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(FinslerError::InvalidMetric(format!(
            "|ε| must stay below 1/√2 so that ‖b‖ < 1, got {epsilon}"
        )));
    }
    randers(
        format!("randers_nonparallel({epsilon})"),
        Chart::torus(&[TAU, TAU], 1.0),
        identity(2),
        CoefficientField::function(2, move |x| vec![epsilon * x[1].sin(), epsilon * x[0].cos()]),
        false,
    )
}

/// Conformally perturbed torus `a = (1 + δ sin x¹ sin x²) I` with a constant
/// 1-form `(b₀, 0)`.
pub fn perturbed_torus(delta: f64, b0: f64) -> Result<MetricModel> {
    if !(delta.abs() < 1.0) {
        return Err(FinslerError::InvalidParameter("|δ| must be below 1".into()));
    }
    let a = CoefficientField::function(4, move |x| {
        let c = 1.0 + delta * x[0].sin() * x[1].sin();
        vec![c, 0.0, 0.0, c]
    });
    let chart = Chart::torus(&[TAU, TAU], 1.0);
    if b0 == 0.0 {
        return riemannian(format!("perturbed_torus({delta})"), chart, a);
    }
    randers(
        format!("perturbed_torus({delta},{b0})"),
        chart,
        a,
        CoefficientField::Constant(vec![b0, 0.0]),
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn berwald_torus_values() {
        let m = berwald_torus(2.0).unwrap();
        assert!((m.eval_f(&[0.3, 0.2], &[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
        assert!((m.eval_f(&[0.3, 0.2], &[-1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(m.is_locally_minkowski());
    }

    #[test]
    fn euclidean_norm() {
        let m = euclidean(2).unwrap();
        assert_eq!(m.eval_f(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(m.eval_f(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn randers_rejects_long_one_form() {
        let err = randers(
            "bad",
            Chart::torus(&[TAU, TAU], 1.0),
            identity(2),
            CoefficientField::Constant(vec![0.8, 0.6]),
            true,
        );
        assert!(matches!(err, Err(FinslerError::InvalidMetric(_))));
        assert!(randers_nonparallel(0.8).is_err());
    }

    #[test]
    fn stereographic_sphere_equator_scale() {
        let m = sphere_stereographic().unwrap();
        // at the equator the conformal factor is 1
        let g = m.fundamental_tensor(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
    }
}
