//! Checks whose hypotheses involve a y-independent connection: the
//! polarized curvature bound, the averaged-norm derivative estimate, the
//! quadratic transport defect around small triangles and constancy of the
//! volume distortion along geodesics.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{half_pi_over_sqrt, is_berwald, require_k_lambda, CheckSettings, Tally, VerifyReport};
use crate::error::{FinslerError, Result};
use crate::flows::{exp_steps, DEFAULT_SHOOTING_ITERATIONS, DEFAULT_SHOOTING_TOL};
use crate::metric::measure::VolumeMeasure;
use crate::metric::MetricModel;
use crate::numeric::{random_unit, Vector};

fn unit_on_indicatrix(model: &MetricModel, x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let u = random_unit(rng, model.dim());
    let f = model.fv(x, &u);
    (u / f).as_slice().to_vec()
}

/// |R_T(X, Y, T, W)| ≤ (2/3)Λ^{3/2}k(1 + √Λ)² for X, Y, W, T on the
/// indicatrix, with R_T assembled by polarization from flag-type terms.
pub fn check_polarized_curvature(
    model: &MetricModel,
    k_used: f64,
    lambda_used: f64,
    s: &CheckSettings,
) -> Result<VerifyReport> {
    s.validate()?;
    require_k_lambda(k_used, Some(lambda_used))?;
    let applicable = is_berwald(model, s.seed)?;
    let bound = 2.0 / 3.0 * lambda_used.powf(1.5) * k_used * (1.0 + lambda_used.sqrt()).powi(2);
    let mut rng = s.rng(7);
    let mut tally = Tally::new(s.tol());
    let mut max_value: f64 = 0.0;
    let mut max_identity_gap: f64 = 0.0;
    for _ in 0..s.samples {
        let x = model.chart().sample_point(&mut rng);
        let t = unit_on_indicatrix(model, &x, &mut rng);
        let xv = unit_on_indicatrix(model, &x, &mut rng);
        let yv = unit_on_indicatrix(model, &x, &mut rng);
        let wv = unit_on_indicatrix(model, &x, &mut rng);
        let r = model.curvature_tensor(&x, &t)?;
        let value = model.polarized_with(&r, &x, &t, &xv, &yv, &wv);
        let direct = model.curvature_form_with(&r, &x, &t, &xv, &yv, &t, &wv);
        max_value = max_value.max(value.abs());
        max_identity_gap = max_identity_gap.max((value - direct).abs());
        tally.record(bound - value.abs());
    }
    let mut config = s.describe();
    config.insert("k_used".into(), json!(k_used));
    config.insert("Lambda_used".into(), json!(lambda_used));
    let extras = BTreeMap::from([
        ("bound".to_string(), bound),
        ("max_abs_value".to_string(), max_value),
        ("max_polarization_gap".to_string(), max_identity_gap),
    ]);
    Ok(tally.report("polarized_curvature", model, applicable, config, extras))
}

fn average_order(n: usize) -> usize {
    if n <= 2 {
        64
    } else {
        16
    }
}

/// d/dt ‖Y‖_g̃ ≤ ‖∇_T Y‖_g̃ for polynomial fields Y along geodesics, where g̃
/// is the indicatrix-averaged Riemannian metric.
pub fn check_norm_derivative(model: &MetricModel, s: &CheckSettings) -> Result<VerifyReport> {
    s.validate()?;
    let applicable = is_berwald(model, s.seed)?;
    let n = model.dim();
    let order = average_order(n);
    let t_max = s.t_max.min(1.0);
    let h = 1e-3;
    let mut rng = s.rng(8);
    let mut tally = Tally::new(s.tol());
    for _ in 0..s.samples {
        let x = model.chart().sample_point(&mut rng);
        let y = unit_on_indicatrix(model, &x, &mut rng);
        let coeffs: Vec<Vector> = (0..3).map(|_| random_unit(&mut rng, n)).collect();
        let field = |t: f64| &coeffs[0] + &coeffs[1] * t + &coeffs[2] * (t * t);
        let field_dot = |t: f64| &coeffs[1] + &coeffs[2] * (2.0 * t);
        let geo_at = |t: f64| -> Result<(Vec<f64>, Vec<f64>)> {
            let steps = exp_steps(t.abs().max(0.05)).max(16);
            let seg = model.integrate_geodesic(&x, &y, t, steps)?;
            Ok((seg.end_position().to_vec(), seg.end_velocity().to_vec()))
        };
        let norm_along = |t: f64| -> Result<f64> {
            let (xt, _) = geo_at(t)?;
            let a = model.average_metric(&xt, order)?;
            let v = field(t);
            Ok(v.dot(&(a * &v)).sqrt())
        };
        let mut margin = f64::INFINITY;
        for q in 1..=6 {
            let t = t_max * q as f64 / 7.0;
            let vals = [
                norm_along(t - 2.0 * h)?,
                norm_along(t - h)?,
                norm_along(t + h)?,
                norm_along(t + 2.0 * h)?,
            ];
            let deriv = (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h);
            let (xt, vt) = geo_at(t)?;
            let nl = model.nonlinear_connection(&xt, &vt)?;
            let cov = field_dot(t) + nl * field(t);
            let a = model.average_metric(&xt, order)?;
            margin = margin.min(cov.dot(&(a * &cov)).sqrt() - deriv);
        }
        tally.record(margin);
    }
    let mut config = s.describe();
    config.insert("t_max".into(), json!(t_max));
    config.insert("average_order".into(), json!(order));
    Ok(tally.report(
        "norm_derivative",
        model,
        applicable,
        config,
        BTreeMap::new(),
    ))
}

/// One two-leg versus direct transport comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomySample {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    /// X transported p1 → p2 → p3.
    pub two_leg: Vec<f64>,
    /// X transported p1 → p3 directly.
    pub direct: Vec<f64>,
    /// F(p3, two_leg − direct).
    pub defect: f64,
}

/// Transports X from p1 to p3 = exp(v13) both directly and via
/// p2 = exp(v12), and measures the discrepancy at p3.
pub fn holonomy_defect(
    model: &MetricModel,
    p1: &[f64],
    v12: &[f64],
    v13: &[f64],
    x: &[f64],
) -> Result<HolonomySample> {
    model.check_nonzero(p1, v12)?;
    model.check_nonzero(p1, v13)?;
    model.check_dim(x)?;
    let (a, b) = (
        Vector::from_column_slice(v12),
        Vector::from_column_slice(v13),
    );
    let cross = a.norm_squared() * b.norm_squared() - a.dot(&b).powi(2);
    if !(cross > 1e-12 * a.norm_squared() * b.norm_squared()) {
        return Err(FinslerError::DegenerateTriangle);
    }
    let steps = |len: f64| exp_steps(len).max(64);
    let seg12 = model.integrate_geodesic(p1, v12, 1.0, steps(model.f(p1, v12)))?;
    let seg13 = model.integrate_geodesic(p1, v13, 1.0, steps(model.f(p1, v13)))?;
    let p2 = seg12.end_position().to_vec();
    let p3 = seg13.end_position().to_vec();
    let v23 = model.exp_inverse(&p2, &p3, DEFAULT_SHOOTING_TOL, DEFAULT_SHOOTING_ITERATIONS)?;
    if v23.norm() < 1e-14 {
        return Err(FinslerError::DegenerateTriangle);
    }
    let seg23 = model.integrate_geodesic(&p2, v23.as_slice(), 1.0, steps(model.fv(&p2, &v23)))?;
    let x12 = model.parallel_transport(&seg12, x)?.end().to_vec();
    let two_leg = model.parallel_transport(&seg23, &x12)?.end().to_vec();
    let direct = model.parallel_transport(&seg13, x)?.end().to_vec();
    let diff: Vec<f64> = two_leg.iter().zip(&direct).map(|(p, q)| p - q).collect();
    let defect = if diff.iter().all(|d| *d == 0.0) {
        0.0
    } else {
        model.f(&p3, &diff)
    };
    Ok(HolonomySample {
        p1: p1.to_vec(),
        p2,
        p3,
        two_leg,
        direct,
        defect,
    })
}

/// Defect below which the transport counts as path independent.
pub const FLAT_DEFECT: f64 = 1e-8;

/// Fits the scaling of the transport defect around shrinking triangles;
/// the exponent must be 2 ± 0.2 unless the defect vanishes.
pub fn check_holonomy_quadratic(
    model: &MetricModel,
    scales: &[f64],
    x_samples: usize,
    k_used: f64,
    lambda_used: f64,
    s: &CheckSettings,
) -> Result<VerifyReport> {
    s.validate()?;
    require_k_lambda(k_used, Some(lambda_used))?;
    if scales.len() < 2 || x_samples == 0 {
        return Err(FinslerError::InvalidParameter(
            "need at least two triangle scales and one transported vector".into(),
        ));
    }
    let gate = if k_used > 0.0 {
        half_pi_over_sqrt(k_used * lambda_used) / 4.0
    } else {
        f64::INFINITY
    };
    for &r in scales {
        if !(r > 0.0 && r < gate) {
            return Err(FinslerError::InvalidParameter(format!(
                "triangle scale {r} must lie in (0, π/(8√(kΛ))) = (0, {gate})"
            )));
        }
    }
    let applicable = is_berwald(model, s.seed)?;
    let n = model.dim();
    let mut rng = s.rng(9);
    let p1 = model.chart().sample_point(&mut rng);
    let u1 = random_unit(&mut rng, n);
    let u2 = loop {
        let c = random_unit(&mut rng, n);
        if c.dot(&u1).abs() < 0.5 {
            break c;
        }
    };
    let xs: Vec<Vec<f64>> = (0..x_samples)
        .map(|_| random_unit(&mut rng, n).as_slice().to_vec())
        .collect();
    let (f1, f2) = (model.fv(&p1, &u1), model.fv(&p1, &u2));
    let mut defects = Vec::with_capacity(scales.len());
    for &r in scales {
        let v12 = (&u1 * (r / f1)).as_slice().to_vec();
        let v13 = (&u2 * (r / f2)).as_slice().to_vec();
        let mut worst: f64 = 0.0;
        for x in &xs {
            let sample = holonomy_defect(model, &p1, &v12, &v13, x)?;
            worst = worst.max(sample.defect / model.f(&p1, x));
        }
        defects.push(worst);
    }
    let mut tally = Tally::new(s.tolerance.unwrap_or(0.0));
    let mut extras = BTreeMap::new();
    let max_defect = defects.iter().fold(0.0f64, |m, d| m.max(*d));
    extras.insert("max_defect".to_string(), max_defect);
    let fitted_c = scales
        .iter()
        .zip(&defects)
        .map(|(r, d)| d / (r * r))
        .fold(0.0f64, f64::max);
    extras.insert("fitted_constant".to_string(), fitted_c);
    for (r, d) in scales.iter().zip(&defects) {
        extras.insert(format!("defect_at_{r}"), *d);
    }
    if max_defect <= FLAT_DEFECT {
        tally.record(FLAT_DEFECT - max_defect);
        extras.insert("slope".to_string(), f64::NAN);
    } else {
        let pts: Vec<(f64, f64)> = scales
            .iter()
            .zip(&defects)
            .map(|(r, d)| (r.ln(), d.ln()))
            .collect();
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        extras.insert("slope".to_string(), slope);
        tally.record(0.2 - (slope - 2.0).abs());
    }
    let mut config = s.describe();
    config.insert("k_used".into(), json!(k_used));
    config.insert("Lambda_used".into(), json!(lambda_used));
    config.insert("triangle_scales".into(), json!(scales));
    config.insert("x_samples".into(), json!(x_samples));
    config.insert("base_point".into(), json!(p1));
    config.insert(
        "radius_gate".into(),
        json!(if gate.is_finite() {
            json!(gate)
        } else {
            json!("inf")
        }),
    );
    Ok(tally.report("holonomy_quadratic", model, applicable, config, extras))
}

/// Volume distortion ln(√det g_γ̇ / σ(γ)) is constant along geodesics for
/// both Busemann–Hausdorff and Holmes–Thompson densities σ.
pub fn check_s_curvature_constancy(model: &MetricModel, s: &CheckSettings) -> Result<VerifyReport> {
    s.validate()?;
    let applicable = is_berwald(model, s.seed)?;
    let t_max = s.t_max.min(1.0);
    let mut rng = s.rng(10);
    let mut tally = Tally::new(s.tolerance.unwrap_or(1e-5));
    let mut worst_drift: f64 = 0.0;
    for _ in 0..s.samples {
        let x = model.chart().sample_point(&mut rng);
        let y = unit_on_indicatrix(model, &x, &mut rng);
        let geo = model.integrate_geodesic(&x, &y, t_max, s.t_steps)?;
        let steps = geo.len() - 1;
        let mut drift: f64 = 0.0;
        for measure in [VolumeMeasure::Bh, VolumeMeasure::Ht] {
            let distortion = |idx: usize| -> Result<f64> {
                let (xt, vt) = (&geo.xs[idx], &geo.vs[idx]);
                let det = model.g(xt, vt).determinant();
                Ok(0.5 * det.ln() - model.volume_density(xt, measure)?.ln())
            };
            let base = distortion(0)?;
            for q in 1..=8 {
                drift = drift.max((distortion(q * steps / 8)? - base).abs());
            }
        }
        worst_drift = worst_drift.max(drift);
        tally.record(-drift);
    }
    let mut config = s.describe();
    config.insert("t_max".into(), json!(t_max));
    let extras = BTreeMap::from([("max_distortion_drift".to_string(), worst_drift)]);
    Ok(tally.report("s_curvature_constancy", model, applicable, config, extras))
}
