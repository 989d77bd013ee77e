//! Checks built on Jacobi fields and parallel transport along a single
//! geodesic: comparison bands for |d exp|, distance distortion in small
//! balls, the transported curvature operator and the Jacobi derivative
//! estimate.

use std::collections::BTreeMap;

use serde_json::json;

use super::{
    band, half_pi_over_sqrt, norm_at, orthogonal_part, orthonormal_complement, require_k_lambda,
    sample_unit_frame, CheckSettings, Tally, VerifyReport,
};
use crate::bounds::{s_k, t_frak};
use crate::error::{FinslerError, Result};
use crate::flows::{GeodesicSegment, DEFAULT_SHOOTING_ITERATIONS, DEFAULT_SHOOTING_TOL};
use crate::metric::MetricModel;
use crate::numeric::{random_unit, Matrix, Vector};

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

/// Geodesic parameter range for the comparison lemmas.
fn comparison_horizon(k: f64, s: &CheckSettings) -> f64 {
    s.t_max.min(half_pi_over_sqrt(k))
}

/// Jacobi fields with J(0) = 0, J′(0) = e_i, one per coordinate direction.
fn exp_fields(model: &MetricModel, geo: &GeodesicSegment) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = model.dim();
    let zero = vec![0.0; n];
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            Ok(model.jacobi_field(geo, &zero, &e)?.j)
        })
        .collect()
}

fn column_matrix(fields: &[Vec<Vec<f64>>], idx: usize, scale: f64) -> Matrix {
    let n = fields.len();
    Matrix::from_fn(n, n, |r, c| fields[c][idx][r] * scale)
}

/// Band s_k(t)/t ≤ ‖J(t)‖_γ̇ / (t‖X‖_y) ≤ s_{−k}(t)/t for J(0) = 0, J′(0) = X.
pub fn check_rauch(model: &MetricModel, k_used: f64, s: &CheckSettings) -> Result<VerifyReport> {
    s.validate()?;
    require_k_lambda(k_used, None)?;
    let t_max = comparison_horizon(k_used, s);
    let mut rng = s.rng(1);
    let mut tally = Tally::new(s.tol());
    let mut edge_gap: f64 = 0.0;
    for _ in 0..s.samples {
        let (x, y) = sample_unit_frame(model, &mut rng);
        let xv = random_unit(&mut rng, model.dim());
        let geo = model.integrate_geodesic(&x, y.as_slice(), t_max, s.t_steps)?;
        let zero = vec![0.0; model.dim()];
        let sol = model.jacobi_field(&geo, &zero, xv.as_slice())?;
        let xn = norm_at(model, &x, y.as_slice(), xv.as_slice());
        let mut margin = f64::INFINITY;
        for i in 1..geo.len() {
            let t = geo.t_grid[i];
            let ratio = norm_at(model, &geo.xs[i], &geo.vs[i], &sol.j[i]) / (t * xn);
            let (lo, hi) = band(k_used, t);
            margin = margin.min((ratio - lo) / lo).min((hi - ratio) / hi);
        }
        tally.record(margin);

        // perpendicular fields sit on the lower edge for constant curvature k
        let perp = orthogonal_part(model, &x, &y, &xv);
        let pn = norm_at(model, &x, y.as_slice(), perp.as_slice());
        if pn > 1e-6 {
            let sol = model.jacobi_field(&geo, &zero, perp.as_slice())?;
            let last = geo.len() - 1;
            let ratio = norm_at(model, &geo.xs[last], &geo.vs[last], &sol.j[last]) / (t_max * pn);
            edge_gap = edge_gap.max((ratio - band(k_used, t_max).0).abs());
        }
    }
    let mut config = s.describe();
    config.insert("k_used".into(), json!(k_used));
    config.insert("t_max".into(), json!(t_max));
    let extras = BTreeMap::from([("perpendicular_edge_gap".to_string(), edge_gap)]);
    Ok(tally.report("rauch", model, true, config, extras))
}

/// s_k(R)F(Q−P)/(ΛR) ≤ d(p, q) ≤ Λ s_{−k}(R)F(Q−P)/R for p = exp_x P,
/// q = exp_x Q whose minimal geodesic stays in the forward ball of radius R.
pub fn check_distance_comparison(
    model: &MetricModel,
    k_used: f64,
    lambda_used: f64,
    radius: f64,
    s: &CheckSettings,
) -> Result<VerifyReport> {
    s.validate()?;
    require_k_lambda(k_used, Some(lambda_used))?;
    if !(radius > 0.0 && radius < half_pi_over_sqrt(k_used)) {
        return Err(FinslerError::InvalidParameter(format!(
            "radius {radius} must lie in (0, π/(2√k))"
        )));
    }
    let n = model.dim();
    let mut rng = s.rng(2);
    let mut tally = Tally::new(s.tol());
    let mut skipped = 0usize;
    let mut attempts = 0usize;
    let lower_c = s_k(k_used, radius) / (lambda_used * radius);
    let upper_c = lambda_used * s_k(-k_used, radius) / radius;
    while tally.samples < s.samples && attempts < 4 * s.samples {
        attempts += 1;
        let x = model.chart().sample_point(&mut rng);
        let mut draw = || {
            let u = random_unit(&mut rng, n);
            let rho = 0.5 * radius * rand::Rng::random::<f64>(&mut rng);
            let f = model.fv(&x, &u);
            (u * (rho / f)).as_slice().to_vec()
        };
        let (pv, qv) = (draw(), draw());
        let chord = model.f(&x, &sub(&qv, &pv));
        if chord < 1e-6 * radius {
            skipped += 1;
            continue;
        }
        let p = model.exp_lift(&x, &pv)?;
        let q = model.exp_lift(&x, &qv)?;
        let v = model.exp_inverse(&p, &q, DEFAULT_SHOOTING_TOL, DEFAULT_SHOOTING_ITERATIONS)?;
        let d = model.f(&p, v.as_slice());
        let mut inside = true;
        for frac in [0.25, 0.5, 0.75] {
            let z = model.exp_lift(&p, &scaled(v.as_slice(), frac))?;
            if model.distance(&x, &z, DEFAULT_SHOOTING_TOL)? > radius {
                inside = false;
                break;
            }
        }
        if !inside {
            skipped += 1;
            continue;
        }
        let ratio = d / chord;
        tally.record((ratio - lower_c).min(upper_c - ratio));
    }
    let mut config = s.describe();
    config.insert("k_used".into(), json!(k_used));
    config.insert("Lambda_used".into(), json!(lambda_used));
    config.insert("radius".into(), json!(radius));
    let extras = BTreeMap::from([
        ("skipped_configurations".to_string(), skipped as f64),
        ("lower_factor".to_string(), lower_c),
        ("upper_factor".to_string(), upper_c),
    ]);
    Ok(tally.report("distance_comparison", model, true, config, extras))
}

/// ‖P⁻¹R_T P‖ ≤ k on y^⊥, with P transport along the geodesic and the norm
/// taken in g_y.
pub fn check_curvature_operator_norm(
    model: &MetricModel,
    k_used: f64,
    s: &CheckSettings,
) -> Result<VerifyReport> {
    s.validate()?;
    require_k_lambda(k_used, None)?;
    let t_max = comparison_horizon(k_used, s);
    let mut rng = s.rng(3);
    let mut tally = Tally::new(s.tol());
    let mut max_norm: f64 = 0.0;
    for _ in 0..s.samples {
        let (x, y) = sample_unit_frame(model, &mut rng);
        let basis = orthonormal_complement(model, &x, &y);
        let geo = model.integrate_geodesic(&x, y.as_slice(), t_max, s.t_steps)?;
        let vecs: Vec<Vec<f64>> = basis.iter().map(|b| b.as_slice().to_vec()).collect();
        let frames = model.parallel_transport_many(&geo, &vecs)?;
        let steps = geo.len() - 1;
        let mut worst: f64 = 0.0;
        for idx in [0, steps / 4, steps / 2, 3 * steps / 4, steps] {
            let (xt, tt) = (&geo.xs[idx], &geo.vs[idx]);
            let r = model.curvature_tensor(xt, tt)?;
            let g = model.g(xt, tt);
            let tv = Vector::from_column_slice(tt);
            let e: Vec<Vector> = frames
                .iter()
                .map(|f| Vector::from_column_slice(&f.x[idx]))
                .collect();
            let m = e.len();
            // R_T(V) = R(V, T)T
            let op = Matrix::from_fn(m, m, |a, b| e[a].dot(&(&g * r.apply(&tv, &e[b], &tv))));
            let op = crate::numeric::symmetrize(&op);
            let norm = op
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            worst = worst.max(norm);
        }
        max_norm = max_norm.max(worst);
        tally.record(k_used - worst);
    }
    let mut config = s.describe();
    config.insert("k_used".into(), json!(k_used));
    config.insert("t_max".into(), json!(t_max));
    let extras = BTreeMap::from([("max_operator_norm".to_string(), max_norm)]);
    Ok(tally.report("curvature_operator_norm", model, true, config, extras))
}

/// ‖J(s) − s·P X‖_γ̇ ≤ ‖X‖_y (s_{−k}(s) − s) for the Jacobi field with
/// J(0) = 0, J′(0) = X ⊥ y. Pulled back by the isometric transport this is
/// the deviation bound for η″ + 𝓡η = 0.
pub fn check_eta_bound(
    model: &MetricModel,
    k_used: f64,
    s: &CheckSettings,
) -> Result<VerifyReport> {
    s.validate()?;
    require_k_lambda(k_used, None)?;
    let t_max = comparison_horizon(k_used, s);
    let mut rng = s.rng(4);
    let mut tally = Tally::new(s.tol());
    let mut worst_ratio: f64 = 0.0;
    while tally.samples < s.samples {
        let (x, y) = sample_unit_frame(model, &mut rng);
        let xv = orthogonal_part(model, &x, &y, &random_unit(&mut rng, model.dim()));
        let xn = norm_at(model, &x, y.as_slice(), xv.as_slice());
        if xn < 1e-6 {
            continue;
        }
        let geo = model.integrate_geodesic(&x, y.as_slice(), t_max, s.t_steps)?;
        let sol = model.jacobi_field(&geo, &vec![0.0; model.dim()], xv.as_slice())?;
        let px = model.parallel_transport(&geo, xv.as_slice())?;
        let mut margin = f64::INFINITY;
        for i in 1..geo.len() {
            let t = geo.t_grid[i];
            let dev = sub(&sol.j[i], &scaled(&px.x[i], t));
            let lhs = norm_at(model, &geo.xs[i], &geo.vs[i], &dev) / xn;
            let rhs = s_k(-k_used, t) - t;
            margin = margin.min(rhs - lhs);
            if rhs > 0.0 {
                worst_ratio = worst_ratio.max(lhs / rhs);
            }
        }
        tally.record(margin);
    }
    let mut config = s.describe();
    config.insert("k_used".into(), json!(k_used));
    config.insert("t_max".into(), json!(t_max));
    let extras = BTreeMap::from([("max_lhs_over_rhs".to_string(), worst_ratio)]);
    Ok(tally.report("eta_bound", model, true, config, extras))
}

/// Forward: ‖(exp_p)_{*ty}X − P X‖ ≤ (s_{−k}(t)/t − 1)‖X‖.
/// Inverse: ‖(exp_p)_{*ty}⁻¹Y − P⁻¹Y‖ ≤ (t/s_k(t))(s_{−k}(t)/t − 1)‖Y‖.
pub fn check_transport_vs_exp(
    model: &MetricModel,
    k_used: f64,
    s: &CheckSettings,
) -> Result<VerifyReport> {
    s.validate()?;
    require_k_lambda(k_used, None)?;
    // the inverse estimate degenerates at the conjugate-comparison radius
    let t_max = comparison_horizon(k_used, s) * if k_used > 0.0 { 0.999 } else { 1.0 };
    let n = model.dim();
    let mut rng = s.rng(5);
    let mut tally = Tally::new(s.tol());
    let mut forward_worst = f64::INFINITY;
    let mut inverse_worst = f64::INFINITY;
    for _ in 0..s.samples {
        let (x, y) = sample_unit_frame(model, &mut rng);
        let xv = random_unit(&mut rng, n);
        let yv = random_unit(&mut rng, n);
        let xn = norm_at(model, &x, y.as_slice(), xv.as_slice());
        let geo = model.integrate_geodesic(&x, y.as_slice(), t_max, s.t_steps)?;
        let fields = exp_fields(model, &geo)?;
        let ident: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        let transports: Vec<Vec<Vec<f64>>> = model
            .parallel_transport_many(&geo, &ident)?
            .into_iter()
            .map(|f| f.x)
            .collect();
        let steps = geo.len() - 1;
        let mut margin = f64::INFINITY;
        for idx in (1..=8).map(|q| q * steps / 8) {
            let t = geo.t_grid[idx];
            let (xt, tt) = (&geo.xs[idx], &geo.vs[idx]);
            let d = column_matrix(&fields, idx, 1.0 / t);
            let p = column_matrix(&transports, idx, 1.0);
            let excess = s_k(-k_used, t) / t - 1.0;

            let diff = (&d - &p) * &xv;
            let fwd = excess - norm_at(model, xt, tt, diff.as_slice()) / xn;
            forward_worst = forward_worst.min(fwd);

            let (Some(d_inv), Some(p_inv)) = (d.clone().try_inverse(), p.clone().try_inverse())
            else {
                return Err(FinslerError::SingularTensor);
            };
            let back = (d_inv - p_inv) * &yv;
            let y_norm = norm_at(model, xt, tt, yv.as_slice());
            let inv = t / s_k(k_used, t) * excess
                - norm_at(model, &x, y.as_slice(), back.as_slice()) / y_norm;
            inverse_worst = inverse_worst.min(inv);
            margin = margin.min(fwd).min(inv);
        }
        tally.record(margin);
    }
    let mut config = s.describe();
    config.insert("k_used".into(), json!(k_used));
    config.insert("t_max".into(), json!(t_max));
    let extras = BTreeMap::from([
        ("forward_worst_margin".to_string(), forward_worst),
        ("inverse_worst_margin".to_string(), inverse_worst),
    ]);
    Ok(tally.report("transport_vs_exp", model, true, config, extras))
}

/// ‖J(t) − tJ′(t)‖_γ̇ ≤ ‖J(t)‖_γ̇/(20Λ) for J(0) = 0 and t up to the
/// admissible time 𝔱(k, Λ).
pub fn check_jacobi_derivative(
    model: &MetricModel,
    lambda_used: f64,
    k_used: f64,
    s: &CheckSettings,
) -> Result<VerifyReport> {
    s.validate()?;
    require_k_lambda(k_used, Some(lambda_used))?;
    let t_cap = s.t_max.min(t_frak(k_used, lambda_used));
    let mut rng = s.rng(6);
    let mut tally = Tally::new(s.tol());
    for _ in 0..s.samples {
        let (x, y) = sample_unit_frame(model, &mut rng);
        let xv = random_unit(&mut rng, model.dim());
        let xn = norm_at(model, &x, y.as_slice(), xv.as_slice());
        let geo = model.integrate_geodesic(&x, y.as_slice(), t_cap, s.t_steps)?;
        let sol = model.jacobi_field(&geo, &vec![0.0; model.dim()], xv.as_slice())?;
        let mut margin = f64::INFINITY;
        for i in 1..geo.len() {
            let t = geo.t_grid[i];
            let (xt, tt) = (&geo.xs[i], &geo.vs[i]);
            let lhs = norm_at(model, xt, tt, &sub(&sol.j[i], &scaled(&sol.jp[i], t)));
            let rhs = norm_at(model, xt, tt, &sol.j[i]) / (20.0 * lambda_used);
            margin = margin.min((rhs - lhs) / xn);
        }
        tally.record(margin);
    }
    let mut config = s.describe();
    config.insert("k_used".into(), json!(k_used));
    config.insert("Lambda_used".into(), json!(lambda_used));
    config.insert("t_max".into(), json!(t_cap));
    Ok(tally.report("jacobi_derivative", model, true, config, BTreeMap::new()))
}
