//! Geodesics, the exponential map and its inverse, parallel transport, Jacobi
//! fields and curvature.

mod curvature;
mod jacobi;
mod transport;

pub use curvature::CurvatureTensor;
pub use jacobi::JacobiSolution;
pub use transport::TransportFrame;

use crate::error::{FinslerError, Result};
use crate::metric::{ChartPoint, MetricModel};
use crate::numeric::{rk4_step, Matrix, Vector};

/// A geodesic sampled on a uniform time grid. Positions are the continuous
/// lift in chart coordinates (not reduced modulo periods) so that differences
/// along the curve stay meaningful on tori.
#[derive(Clone, Debug)]
pub struct GeodesicSegment {
    pub t_grid: Vec<f64>,
    pub xs: Vec<Vec<f64>>,
    pub vs: Vec<Vec<f64>>,
    /// F(x₀, y₀), conserved along the flow.
    pub speed: f64,
}

impl GeodesicSegment {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn end_position(&self) -> &[f64] {
        self.xs.last().expect("geodesic has at least one sample")
    }

    pub fn end_velocity(&self) -> &[f64] {
        self.vs.last().expect("geodesic has at least one sample")
    }

    /// Largest relative deviation of F(x_t, v_t) from the initial speed.
    pub fn speed_drift(&self, model: &MetricModel) -> f64 {
        self.xs
            .iter()
            .zip(&self.vs)
            .map(|(x, v)| (model.f(x, v) - self.speed).abs() / self.speed.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Minimum number of RK4 steps for the exponential map; more are taken for
/// long vectors so that each step covers at most 0.01 of arc length.
pub const MIN_EXP_STEPS: usize = 16;

pub(crate) fn exp_steps(length: f64) -> usize {
    MIN_EXP_STEPS.max((length * 100.0).ceil() as usize)
}

pub(crate) fn split(state: &[f64], n: usize) -> (&[f64], &[f64]) {
    (&state[..n], &state[n..2 * n])
}

pub(crate) fn check_finite(state: &[f64], what: &str) -> Result<()> {
    if state.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FinslerError::IntegrationFailure(format!(
            "non-finite state while integrating {what}"
        )))
    }
}

impl MetricModel {
    /// Right-hand side of the geodesic equation on (x, v).
    pub(crate) fn geodesic_rhs(&self, state: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let (x, v) = split(state, n);
        let g = self.spray(x, v)?;
        let mut out = Vec::with_capacity(2 * n);
        out.extend_from_slice(v);
        out.extend(g.iter().map(|gi| -2.0 * gi));
        Ok(out)
    }

    /// Integrates ẍ = −2G(x, ẋ) on [0, t_end] with `steps` RK4 steps.
    pub fn integrate_geodesic(
        &self,
        x0: &[f64],
        y0: &[f64],
        t_end: f64,
        steps: usize,
    ) -> Result<GeodesicSegment> {
        self.check_nonzero(x0, y0)?;
        if steps < 8 {
            return Err(FinslerError::InvalidParameter(
                "at least 8 integration steps are required".into(),
            ));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(FinslerError::InvalidParameter(
                "t_end must be positive".into(),
            ));
        }
        self.integrate_geodesic_unchecked(x0, y0, t_end, steps)
    }

    pub(crate) fn integrate_geodesic_unchecked(
        &self,
        x0: &[f64],
        y0: &[f64],
        t_end: f64,
        steps: usize,
    ) -> Result<GeodesicSegment> {
        let n = self.dim();
        let dt = t_end / steps as f64;
        let mut state: Vec<f64> = x0.iter().chain(y0).copied().collect();
        let mut seg = GeodesicSegment {
            t_grid: Vec::with_capacity(steps + 1),
            xs: Vec::with_capacity(steps + 1),
            vs: Vec::with_capacity(steps + 1),
            speed: self.f(x0, y0),
        };
        let flat = self.is_locally_minkowski();
        for step in 0..=steps {
            seg.t_grid.push(dt * step as f64);
            seg.xs.push(state[..n].to_vec());
            seg.vs.push(state[n..].to_vec());
            if step == steps {
                break;
            }
            if flat {
                for i in 0..n {
                    state[i] = x0[i] + dt * (step + 1) as f64 * y0[i];
                }
                continue;
            }
            let mut failure = None;
            state = rk4_step(&state, dt, &mut |s| match self.geodesic_rhs(s) {
                Ok(r) => r,
                Err(e) => {
                    failure.get_or_insert(e);
                    vec![f64::NAN; 2 * n]
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            check_finite(&state, "a geodesic")?;
        }
        Ok(seg)
    }

    /// Endpoint of the geodesic with initial velocity v, as a continuous lift.
    pub(crate) fn exp_lift(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        if v.iter().all(|c| *c == 0.0) {
            return Ok(x.to_vec());
        }
        if self.is_locally_minkowski() {
            return Ok(x.iter().zip(v).map(|(a, b)| a + b).collect());
        }
        let steps = exp_steps(self.f(x, v));
        Ok(self
            .integrate_geodesic_unchecked(x, v, 1.0, steps)?
            .end_position()
            .to_vec())
    }

    /// exp_x(v), with periodic coordinates reduced.
    pub fn exp_map(&self, x: &[f64], v: &[f64]) -> Result<ChartPoint> {
        self.check_dim(x)?;
        self.check_dim(v)?;
        let end = self.exp_lift(x, v)?;
        self.point(&end)
    }

    /// Differential of exp_x at v, i.e. J(1) for the Jacobi fields with
    /// J(0) = 0, J′(0) = e_i (columns).
    pub fn exp_differential(&self, x: &[f64], v: &[f64]) -> Result<Matrix> {
        self.check_dim(x)?;
        self.check_dim(v)?;
        let n = self.dim();
        if self.is_locally_minkowski() {
            return Ok(Matrix::identity(n, n));
        }
        if v.iter().all(|c| *c == 0.0) {
            return Ok(Matrix::identity(n, n));
        }
        self.endpoint_jacobian(x, v)
    }

    /// Solves exp_x(v) = q for v by damped Newton shooting, starting from the
    /// coordinate chord to the nearest deck translate of q.
    pub fn exp_inverse(&self, x: &[f64], q: &[f64], tol: f64, max_iter: usize) -> Result<Vector> {
        self.check_dim(x)?;
        self.check_dim(q)?;
        let mut candidates: Vec<(f64, Vec<f64>)> = self
            .chart()
            .deck_translates()
            .into_iter()
            .map(|d| {
                let chord: Vec<f64> = (0..self.dim()).map(|i| q[i] + d[i] - x[i]).collect();
                (self.f(x, &chord), chord)
            })
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best_chord = candidates[0].0;
        if best_chord == 0.0 {
            return Ok(Vector::zeros(self.dim()));
        }

        // translates whose chord is not much longer could still win after shooting
        let mut solutions: Vec<(f64, Vector)> = Vec::new();
        let mut first_error = None;
        for (_, chord) in candidates.iter().filter(|(c, _)| *c <= 1.25 * best_chord) {
            let target: Vec<f64> = x.iter().zip(chord).map(|(a, b)| a + b).collect();
            match self.shoot(x, &target, chord, tol, max_iter) {
                Ok(v) => solutions.push((self.fv(x, &v), v)),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        if solutions.is_empty() {
            return Err(first_error.expect("at least one candidate was attempted"));
        }
        solutions.sort_by(|a, b| a.0.total_cmp(&b.0));
        if solutions.len() > 1 {
            let (f1, f2) = (solutions[0].0, solutions[1].0);
            if (f2 - f1).abs() <= tol.max(1e-9 * f1) {
                return Err(FinslerError::AmbiguousPreimage {
                    first: f1,
                    second: f2,
                });
            }
        }
        Ok(solutions.swap_remove(0).1)
    }

    fn shoot(
        &self,
        x: &[f64],
        target: &[f64],
        guess: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<Vector> {
        let n = self.dim();
        let mut v = Vector::from_column_slice(guess);
        if self.is_locally_minkowski() {
            return Ok(v);
        }
        let residual_at = |v: &Vector| -> Result<Vector> {
            let end = self.exp_lift(x, v.as_slice())?;
            Ok(Vector::from_fn(n, |i, _| end[i] - target[i]))
        };
        let mut res = residual_at(&v)?;
        let mut res_norm = res.norm();
        // the residual vector is refreshed together with its norm
        for _ in 0..max_iter {
            if res_norm <= tol {
                return Ok(v);
            }
            let jac = self.endpoint_jacobian(x, v.as_slice())?;
            let step = jac.lu().solve(&res).ok_or(FinslerError::ShootingDiverged {
                iterations: max_iter,
                residual: res_norm,
            })?;
            let mut t = 1.0;
            loop {
                let trial = &v - &step * t;
                if let Ok(r) = residual_at(&trial) {
                    let rn = r.norm();
                    if rn < res_norm || t < 1e-6 {
                        v = trial;
                        res = r;
                        res_norm = rn;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-6 {
                    return Err(FinslerError::ShootingDiverged {
                        iterations: max_iter,
                        residual: res_norm,
                    });
                }
            }
        }
        if res_norm <= tol {
            Ok(v)
        } else {
            Err(FinslerError::ShootingDiverged {
                iterations: max_iter,
                residual: res_norm,
            })
        }
    }

    /// Forward distance d(p, q) = F(p, exp_p⁻¹ q); not symmetric in general.
    pub fn distance(&self, p: &[f64], q: &[f64], tol: f64) -> Result<f64> {
        let v = self.exp_inverse(p, q, tol, DEFAULT_SHOOTING_ITERATIONS)?;
        Ok(self.fv(p, &v))
    }
}

pub const DEFAULT_SHOOTING_ITERATIONS: usize = 50;
pub const DEFAULT_SHOOTING_TOL: f64 = 1e-11;
