//! Jacobi fields as solutions of the linearized geodesic flow.
//!
//! A variation (J, W) of a solution (x, v) of ẋ = v, v̇ = −2G(x, v) satisfies
//! J̇ = W, Ẇ = −2 ∂ₓG·J − 2N·W, with N = ∂G/∂y. The covariant derivative
//! along the geodesic with reference vector γ̇ is J′ = W + N·J.

use crate::error::{FinslerError, Result};
use crate::metric::MetricModel;
use crate::numeric::{central4, rk4_step, Matrix, Vector};

use super::{check_finite, exp_steps, GeodesicSegment};

/// (J, W) samples of one variation field on the geodesic grid.
type VariationPath = Vec<(Vec<f64>, Vec<f64>)>;

#[derive(Clone, Debug)]
pub struct JacobiSolution {
    pub geodesic: GeodesicSegment,
    /// J(t) at the geodesic's grid times.
    pub j: Vec<Vec<f64>>,
    /// Covariant derivative J′(t) along the geodesic.
    pub jp: Vec<Vec<f64>>,
}

impl MetricModel {
    /// ∂G^i/∂x^k as a matrix (row i, column k).
    pub(crate) fn spray_x_derivative(&self, x: &[f64], v: &[f64]) -> Result<Matrix> {
        let n = self.dim();
        let h = self.steps().curvature;
        let mut out = Matrix::zeros(n, n);
        let failure = std::cell::RefCell::new(None);
        for k in 0..n {
            let d = central4(h, |s| {
                let mut xs = x.to_vec();
                xs[k] += s;
                match self.spray(&xs, v) {
                    Ok(g) => g.as_slice().to_vec(),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        vec![f64::NAN; n]
                    }
                }
            });
            for i in 0..n {
                out[(i, k)] = d[i];
            }
        }
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Integrates the geodesic from (x0, v0) together with several variations
    /// given by their initial (J, W). Returns the geodesic and, per variation,
    /// the sampled (J, W) pairs.
    pub(crate) fn integrate_variations(
        &self,
        x0: &[f64],
        v0: &[f64],
        t_end: f64,
        steps: usize,
        inits: &[(Vec<f64>, Vec<f64>)],
    ) -> Result<(GeodesicSegment, Vec<VariationPath>)> {
        let n = self.dim();
        let m = inits.len();
        let dt = t_end / steps as f64;
        let mut state: Vec<f64> = x0.iter().chain(v0).copied().collect();
        for (j, w) in inits {
            state.extend_from_slice(j);
            state.extend_from_slice(w);
        }
        let mut seg = GeodesicSegment {
            t_grid: Vec::with_capacity(steps + 1),
            xs: Vec::with_capacity(steps + 1),
            vs: Vec::with_capacity(steps + 1),
            speed: self.f(x0, v0),
        };
        let mut fields = vec![Vec::with_capacity(steps + 1); m];
        let flat = self.is_locally_minkowski();
        let failure = std::cell::RefCell::new(None);
        let mut rhs = |s: &[f64]| -> Vec<f64> {
            let (x, v) = (&s[..n], &s[n..2 * n]);
            let mut out = vec![0.0; s.len()];
            out[..n].copy_from_slice(v);
            if flat {
                for a in 0..m {
                    let base = 2 * n + 2 * n * a;
                    for i in 0..n {
                        out[base + i] = s[base + n + i];
                    }
                }
                return out;
            }
            let computed = self.spray(x, v).and_then(|g| {
                Ok((
                    g,
                    self.spray_x_derivative(x, v)?,
                    self.nonlinear_unchecked(x, v)?,
                ))
            });
            let (g, dgx, nl) = match computed {
                Ok(t) => t,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    return vec![f64::NAN; s.len()];
                }
            };
            for i in 0..n {
                out[n + i] = -2.0 * g[i];
            }
            for a in 0..m {
                let base = 2 * n + 2 * n * a;
                let j = Vector::from_column_slice(&s[base..base + n]);
                let w = Vector::from_column_slice(&s[base + n..base + 2 * n]);
                let acc = (&dgx * &j + &nl * &w) * -2.0;
                out[base..base + n].copy_from_slice(w.as_slice());
                out[base + n..base + 2 * n].copy_from_slice(acc.as_slice());
            }
            out
        };
        for step in 0..=steps {
            seg.t_grid.push(dt * step as f64);
            seg.xs.push(state[..n].to_vec());
            seg.vs.push(state[n..2 * n].to_vec());
            for (a, field) in fields.iter_mut().enumerate() {
                let base = 2 * n + 2 * n * a;
                field.push((
                    state[base..base + n].to_vec(),
                    state[base + n..base + 2 * n].to_vec(),
                ));
            }
            if step == steps {
                break;
            }
            state = rk4_step(&state, dt, &mut rhs);
            if let Some(e) = failure.borrow_mut().take() {
                return Err(e);
            }
            check_finite(&state, "a Jacobi field")?;
        }
        Ok((seg, fields))
    }

    /// Jacobi field along `geodesic` with J(0) = j0 and covariant J′(0) = jp0.
    pub fn jacobi_field(
        &self,
        geodesic: &GeodesicSegment,
        j0: &[f64],
        jp0: &[f64],
    ) -> Result<JacobiSolution> {
        self.check_dim(j0)?;
        self.check_dim(jp0)?;
        if geodesic.len() < 2 {
            return Err(FinslerError::InvalidParameter(
                "geodesic needs at least two samples".into(),
            ));
        }
        let x0 = &geodesic.xs[0];
        let v0 = &geodesic.vs[0];
        let n0 = self.nonlinear_unchecked(x0, v0)?;
        let w0 = Vector::from_column_slice(jp0) - &n0 * Vector::from_column_slice(j0);
        let steps = geodesic.len() - 1;
        let t_end = *geodesic.t_grid.last().expect("nonempty grid");
        let (seg, fields) = self.integrate_variations(
            x0,
            v0,
            t_end,
            steps,
            &[(j0.to_vec(), w0.as_slice().to_vec())],
        )?;
        let mut j = Vec::with_capacity(seg.len());
        let mut jp = Vec::with_capacity(seg.len());
        for ((x, v), (jj, w)) in seg.xs.iter().zip(&seg.vs).zip(&fields[0]) {
            let nl = self.nonlinear_unchecked(x, v)?;
            let cov = Vector::from_column_slice(w) + &nl * Vector::from_column_slice(jj);
            j.push(jj.clone());
            jp.push(cov.as_slice().to_vec());
        }
        Ok(JacobiSolution {
            geodesic: seg,
            j,
            jp,
        })
    }

    /// Differential of v ↦ exp_x(v) at v (columns are images of e_i).
    pub(crate) fn endpoint_jacobian(&self, x: &[f64], v: &[f64]) -> Result<Matrix> {
        let n = self.dim();
        // J(0) = 0 so W(0) = J′(0) = e_i
        let inits: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                (vec![0.0; n], e)
            })
            .collect();
        let steps = exp_steps(self.f(x, v));
        let (_, fields) = self.integrate_variations(x, v, 1.0, steps, &inits)?;
        let mut out = Matrix::zeros(n, n);
        for (i, field) in fields.iter().enumerate() {
            let end = &field.last().expect("nonempty").0;
            for r in 0..n {
                out[(r, i)] = end[r];
            }
        }
        Ok(out)
    }
}
