//! Parallel transport along geodesics with reference vector γ̇.
//!
//! Uses the identity Γ^i_jk(x, y) yᵏ = N^i_j(x, y) for the Chern connection,
//! so the transport equation reads Ẋ = −N(γ, γ̇)·X.

use crate::error::{FinslerError, Result};
use crate::metric::MetricModel;
use crate::numeric::{rk4_step, Vector};

use super::{check_finite, GeodesicSegment};

#[derive(Clone, Debug)]
pub struct TransportFrame {
    pub geodesic: GeodesicSegment,
    /// X(t) at the geodesic's grid times.
    pub x: Vec<Vec<f64>>,
}

impl TransportFrame {
    pub fn end(&self) -> &[f64] {
        self.x.last().expect("nonempty transport")
    }
}

impl MetricModel {
    /// Transports X0 along the geodesic (re-integrated jointly on its grid).
    pub fn parallel_transport(
        &self,
        geodesic: &GeodesicSegment,
        x0: &[f64],
    ) -> Result<TransportFrame> {
        Ok(self
            .parallel_transport_many(geodesic, &[x0.to_vec()])?
            .pop()
            .expect("one vector in, one frame out"))
    }

    /// Transports several vectors at once along the same geodesic.
    pub fn parallel_transport_many(
        &self,
        geodesic: &GeodesicSegment,
        vectors: &[Vec<f64>],
    ) -> Result<Vec<TransportFrame>> {
        for v in vectors {
            self.check_dim(v)?;
        }
        if geodesic.len() < 2 {
            return Err(FinslerError::InvalidParameter(
                "geodesic needs at least two samples".into(),
            ));
        }
        if !(geodesic.speed > 0.0) {
            return Err(FinslerError::ZeroVector);
        }
        let n = self.dim();
        let m = vectors.len();
        let steps = geodesic.len() - 1;
        let t_end = *geodesic.t_grid.last().expect("nonempty grid");
        let dt = t_end / steps as f64;
        let flat = self.is_locally_minkowski();

        let mut state: Vec<f64> = geodesic.xs[0]
            .iter()
            .chain(&geodesic.vs[0])
            .copied()
            .collect();
        for v in vectors {
            state.extend_from_slice(v);
        }
        let mut seg = GeodesicSegment {
            t_grid: Vec::with_capacity(steps + 1),
            xs: Vec::with_capacity(steps + 1),
            vs: Vec::with_capacity(steps + 1),
            speed: geodesic.speed,
        };
        let mut fields: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(steps + 1); m];
        let failure = std::cell::RefCell::new(None);
        let mut rhs = |s: &[f64]| -> Vec<f64> {
            let (x, v) = (&s[..n], &s[n..2 * n]);
            let mut out = vec![0.0; s.len()];
            out[..n].copy_from_slice(v);
            if flat {
                return out;
            }
            let computed = self
                .spray(x, v)
                .and_then(|g| Ok((g, self.nonlinear_unchecked(x, v)?)));
            let (g, nl) = match computed {
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
                let base = 2 * n + n * a;
                let xa = Vector::from_column_slice(&s[base..base + n]);
                let d = -(&nl * xa);
                out[base..base + n].copy_from_slice(d.as_slice());
            }
            out
        };
        for step in 0..=steps {
            seg.t_grid.push(dt * step as f64);
            seg.xs.push(state[..n].to_vec());
            seg.vs.push(state[n..2 * n].to_vec());
            for (a, field) in fields.iter_mut().enumerate() {
                let base = 2 * n + n * a;
                field.push(state[base..base + n].to_vec());
            }
            if step == steps {
                break;
            }
            state = rk4_step(&state, dt, &mut rhs);
            if let Some(e) = failure.borrow_mut().take() {
                return Err(e);
            }
            check_finite(&state, "parallel transport")?;
        }
        Ok(fields
            .into_iter()
            .map(|x| TransportFrame {
                geodesic: seg.clone(),
                x,
            })
            .collect())
    }
}
