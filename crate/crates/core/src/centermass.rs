//! Discrete mass distributions, their vector field V(x) = −Σ w_a exp_x⁻¹(p_a)
//! and the center of mass as the zero of V.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::flows::{DEFAULT_SHOOTING_ITERATIONS, DEFAULT_SHOOTING_TOL};
use crate::metric::{ChartPoint, MetricModel};
use crate::numeric::{central4, Matrix, Vector};

/// Finitely many weighted points; weights are positive and sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MassDistribution {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl MassDistribution {
    /// Requires positive weights summing to 1 within 1e-12.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::validate(&points, &weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(FinslerError::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { points, weights })
    }

    /// Equal weights 1/m.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let m = points.len();
        Self::new(points, vec![1.0 / m.max(1) as f64; m])
    }

    /// Accepts weights whose sum is within 1e-6 of 1 and rescales them.
    pub fn renormalized(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::validate(&points, &weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(FinslerError::Config(format!(
                "mass weights sum to {total}; expected 1"
            )));
        }
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(Self { points, weights })
    }

    fn validate(points: &[Vec<f64>], weights: &[f64]) -> Result<()> {
        if points.is_empty() {
            return Err(FinslerError::InvalidParameter(
                "a mass distribution needs at least one point".into(),
            ));
        }
        if points.len() != weights.len() {
            return Err(FinslerError::InvalidParameter(
                "one weight per point is required".into(),
            ));
        }
        let n = points[0].len();
        if points
            .iter()
            .any(|p| p.len() != n || p.iter().any(|c| !c.is_finite()))
        {
            return Err(FinslerError::InvalidParameter(
                "points must be finite and of equal dimension".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(FinslerError::InvalidParameter(
                "weights must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Reads headerless CSV rows `coords..., weight`; lines starting with `#`
    /// are skipped. A file with no weight column at all means equal weights.
    pub fn from_csv(reader: impl Read, dim: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != dim && rec.len() != dim + 1 {
                return Err(FinslerError::Config(format!(
                    "mass row {} has {} fields, expected {} or {}",
                    line + 1,
                    rec.len(),
                    dim,
                    dim + 1
                )));
            }
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        FinslerError::Config(format!("mass row {}: not a number: {s:?}", line + 1))
                    })
                })
                .collect::<Result<_>>()?;
            weights.push(vals.get(dim).copied());
            points.push(vals[..dim].to_vec());
        }
        if weights.iter().all(Option::is_none) {
            return Self::uniform(points);
        }
        let weights: Option<Vec<f64>> = weights.into_iter().collect();
        let weights =
            weights.ok_or_else(|| FinslerError::Config("some mass rows lack a weight".into()))?;
        Self::renormalized(points, weights)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// V(x) = −Σ w_a exp_x⁻¹(p_a).
pub fn mass_field(model: &MetricModel, dist: &MassDistribution, x: &[f64]) -> Result<Vector> {
    model.check_dim(x)?;
    let mut v = Vector::zeros(model.dim());
    for (index, (p, w)) in dist.points.iter().zip(&dist.weights).enumerate() {
        model.check_dim(p)?;
        let u = model
            .exp_inverse(x, p, DEFAULT_SHOOTING_TOL, DEFAULT_SHOOTING_ITERATIONS)
            .map_err(|e| FinslerError::MassPoint {
                index,
                source: Box::new(e),
            })?;
        v -= u * *w;
    }
    Ok(v)
}

/// A converged center of mass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CenterOfMass {
    pub point: Vec<f64>,
    /// F(q, V(q)) at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// max_a F(q, exp_q⁻¹ p_a): the forward radius of the support seen from q.
    pub support_radius: f64,
    /// Set by [`CenterOfMass::flag_regime`] when a guaranteed radius is known.
    pub outside_guaranteed_regime: Option<bool>,
}

impl CenterOfMass {
    pub fn chart_point(&self, model: &MetricModel) -> Result<ChartPoint> {
        model.point(&self.point)
    }

    /// Marks whether the support exceeded the radius on which uniqueness is
    /// guaranteed.
    pub fn flag_regime(&mut self, guaranteed_radius: f64) {
        self.outside_guaranteed_regime = Some(self.support_radius >= guaranteed_radius);
    }
}

/// Iterates x ← exp_x(−tV(x)), halving t until F(x, V) decreases
/// sufficiently, until F(x, V(x)) < tol.
pub fn center_of_mass(
    model: &MetricModel,
    dist: &MassDistribution,
    x_init: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CenterOfMass> {
    if !(tol > 0.0) {
        return Err(FinslerError::InvalidParameter(
            "tol must be positive".into(),
        ));
    }
    let mut x = model.point(x_init)?.coords;
    let mut v = mass_field(model, dist, &x)?;
    let mut r = model.fv(&x, &v);
    let mut iterations = 0;
    while r >= tol {
        if iterations >= max_iter {
            return Err(FinslerError::MaxIterExceeded {
                iterations,
                residual: r,
            });
        }
        iterations += 1;
        let mut t = 1.0;
        loop {
            let step: Vec<f64> = v.iter().map(|c| -t * c).collect();
            let trial = model.exp_map(&x, &step)?.coords;
            match mass_field(model, dist, &trial) {
                Ok(tv) => {
                    let tr = model.fv(&trial, &tv);
                    if tr <= (1.0 - 1e-4 * t) * r || t < 1.0 / 64.0 {
                        x = trial;
                        v = tv;
                        r = tr;
                        break;
                    }
                }
                Err(e) if t < 1.0 / 64.0 => return Err(e),
                Err(_) => {}
            }
            t *= 0.5;
        }
    }
    let mut support = 0.0f64;
    for p in &dist.points {
        let u = model.exp_inverse(&x, p, DEFAULT_SHOOTING_TOL, DEFAULT_SHOOTING_ITERATIONS)?;
        support = support.max(model.fv(&x, &u));
    }
    Ok(CenterOfMass {
        point: x,
        residual: r,
        iterations,
        support_radius: support,
        outside_guaranteed_regime: None,
    })
}

/// Jacobian ∂Vⁱ/∂xʲ by fourth-order central differences with spacing `step`.
pub fn mass_field_jacobian(
    model: &MetricModel,
    dist: &MassDistribution,
    x: &[f64],
    step: f64,
) -> Result<Matrix> {
    if !(step > 0.0) {
        return Err(FinslerError::InvalidParameter(
            "step must be positive".into(),
        ));
    }
    let n = model.dim();
    model.check_dim(x)?;
    let mut out = Matrix::zeros(n, n);
    let failure = std::cell::RefCell::new(None);
    for j in 0..n {
        let col = central4(step, |s| {
            let mut xs = x.to_vec();
            xs[j] += s;
            match mass_field(model, dist, &xs) {
                Ok(v) => v.as_slice().to_vec(),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    vec![f64::NAN; n]
                }
            }
        });
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn smallest_singular_value(m: &Matrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest ‖γ̇ − D_γ̇V‖/‖γ̇‖ (norms in g_γ̇) at `samples` + 1 evenly spaced
/// times along the geodesic s ↦ exp_{x0}(s v0), s ∈ [0, 1].
pub fn contraction_witness(
    model: &MetricModel,
    dist: &MassDistribution,
    x0: &[f64],
    v0: &[f64],
    samples: usize,
) -> Result<f64> {
    model.check_nonzero(x0, v0)?;
    let samples = samples.max(1);
    let steps = crate::flows::exp_steps(model.f(x0, v0)).max(samples) * 4;
    let geo = model.integrate_geodesic(x0, v0, 1.0, steps)?;
    let h = 1e-3;
    let n = model.dim();
    let failure = std::cell::RefCell::new(None);
    let field_along = |s: f64| -> Vec<f64> {
        let step: Vec<f64> = v0.iter().map(|c| c * s).collect();
        let res = model
            .exp_map(x0, &step)
            .and_then(|p| mass_field(model, dist, &p.coords));
        match res {
            Ok(v) => v.as_slice().to_vec(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                vec![f64::NAN; n]
            }
        }
    };
    let mut worst = 0.0f64;
    for i in 0..=samples {
        let k = i * steps / samples;
        let s = geo.t_grid[k];
        let (x, gdot) = (&geo.xs[k], Vector::from_column_slice(&geo.vs[k]));
        let dv = Vector::from_vec(central4(h, |e| field_along(s + e)));
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let v = Vector::from_vec(field_along(s));
        let nl = model.nonlinear_connection(x, gdot.as_slice())?;
        let cov = dv + nl * v;
        let g = model.fundamental_tensor(x, gdot.as_slice())?;
        let diff = &gdot - cov;
        let ratio = diff.dot(&(&g * &diff)).max(0.0).sqrt() / gdot.dot(&(&g * &gdot)).sqrt();
        worst = worst.max(ratio);
    }
    Ok(worst)
}
