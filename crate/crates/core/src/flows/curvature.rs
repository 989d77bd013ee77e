//! Chern curvature R^i_{jkl}, the curvature operator, flag curvature and
//! T-curvature.

use crate::error::{FinslerError, Result};
use crate::metric::MetricModel;
use crate::numeric::{central4, Tensor3, Vector};

/// R^i_{jkl}(x, y) of the Chern connection, so that
/// `R(C, D)A = R^i_{jkl} Aʲ Cᵏ Dˡ ∂_i`.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    n: usize,
    data: Vec<f64>,
}

impl CurvatureTensor {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l] = v;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// R(C, D)A.
    pub fn apply(&self, a: &Vector, c: &Vector, d: &Vector) -> Vector {
        let n = self.n;
        Vector::from_fn(n, |i, _| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        s += self.get(i, j, k, l) * a[j] * c[k] * d[l];
                    }
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Relative guard on g(y,y)g(V,V) − g(y,V)² against F²(y)F²(V).
pub const FLAG_GUARD: f64 = 1e-10;

impl MetricModel {
    /// R^i_{jkl} = δ_kΓ^i_jl − δ_lΓ^i_jk + Γ^i_mkΓ^m_jl − Γ^i_mlΓ^m_jk with
    /// δ_k = ∂/∂xᵏ − N^m_k ∂/∂y^m.
    pub fn curvature_tensor(&self, x: &[f64], y: &[f64]) -> Result<CurvatureTensor> {
        self.check_nonzero(x, y)?;
        let n = self.dim();
        if self.is_locally_minkowski() {
            return Ok(CurvatureTensor::zeros(n));
        }
        let base = self.connection_unchecked(x, y)?;
        let gamma = &base.chern;
        let h = self.steps().curvature;
        let hy = h * y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);

        let failure = std::cell::RefCell::new(None);
        let chern_at = |xs: &[f64], ys: &[f64]| -> Vec<f64> {
            match self.chern_unchecked(xs, ys) {
                Ok(t) => t.as_slice().to_vec(),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    vec![f64::NAN; n * n * n]
                }
            }
        };
        let dx: Vec<Tensor3> = (0..n)
            .map(|k| {
                Tensor3::from_vec(
                    n,
                    central4(h, |s| {
                        let mut xs = x.to_vec();
                        xs[k] += s;
                        chern_at(&xs, y)
                    }),
                )
            })
            .collect();
        let dy: Vec<Tensor3> = if self.is_riemannian() {
            vec![Tensor3::zeros(n); n]
        } else {
            (0..n)
                .map(|m| {
                    Tensor3::from_vec(
                        n,
                        central4(hy, |s| {
                            let mut ys = y.to_vec();
                            ys[m] += s;
                            chern_at(x, &ys)
                        }),
                    )
                })
                .collect()
        };
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let nl = &base.nonlinear;
        // δ_kΓ^i_jl
        let delta = |k: usize, i: usize, j: usize, l: usize| -> f64 {
            let mut v = dx[k].get(i, j, l);
            for (m, dym) in dy.iter().enumerate() {
                v -= nl[(m, k)] * dym.get(i, j, l);
            }
            v
        };
        let mut r = CurvatureTensor::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = delta(k, i, j, l) - delta(l, i, j, k);
                        for m in 0..n {
                            v += gamma.get(i, m, k) * gamma.get(m, j, l)
                                - gamma.get(i, m, l) * gamma.get(m, j, k);
                        }
                        r.set(i, j, k, l, v);
                    }
                }
            }
        }
        Ok(r)
    }

    /// R_y(V) = R(V, y)y, the Jacobi operator with reference vector y.
    pub fn curvature_operator(&self, x: &[f64], y: &[f64], v: &[f64]) -> Result<Vector> {
        self.check_dim(v)?;
        let r = self.curvature_tensor(x, y)?;
        let yv = Vector::from_column_slice(y);
        Ok(r.apply(&yv, &Vector::from_column_slice(v), &yv))
    }

    /// K(y, V) = g_y(R(V, y)y, V) / (g_y(y,y)g_y(V,V) − g_y(y,V)²).
    pub fn flag_curvature(&self, x: &[f64], y: &[f64], v: &[f64]) -> Result<f64> {
        self.check_nonzero(x, y)?;
        self.check_dim(v)?;
        let g = self.g(x, y);
        let yv = Vector::from_column_slice(y);
        let vv = Vector::from_column_slice(v);
        let gyy = yv.dot(&(&g * &yv));
        let gvv = vv.dot(&(&g * &vv));
        let gyv = yv.dot(&(&g * &vv));
        let denom = gyy * gvv - gyv * gyv;
        let scale = self.f(x, y).powi(2) * self.f(x, v).powi(2);
        if !(denom > FLAG_GUARD * scale) {
            return Err(FinslerError::DegenerateFlag);
        }
        let rv = self.curvature_operator(x, y, v)?;
        Ok(vv.dot(&(&g * rv)) / denom)
    }

    /// R_T(A, B, C, D) = g_T(R(C, D)A, B) with the curvature taken at T.
    pub fn curvature_form(
        &self,
        x: &[f64],
        t: &[f64],
        a: &[f64],
        b: &[f64],
        c: &[f64],
        d: &[f64],
    ) -> Result<f64> {
        let r = self.curvature_tensor(x, t)?;
        Ok(self.curvature_form_with(&r, x, t, a, b, c, d))
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn curvature_form_with(
        &self,
        r: &CurvatureTensor,
        x: &[f64],
        t: &[f64],
        a: &[f64],
        b: &[f64],
        c: &[f64],
        d: &[f64],
    ) -> f64 {
        let g = self.g(x, t);
        let ra = r.apply(
            &Vector::from_column_slice(a),
            &Vector::from_column_slice(c),
            &Vector::from_column_slice(d),
        );
        Vector::from_column_slice(b).dot(&(g * ra))
    }

    /// R_T(X, Y, T, W) assembled from the four "flag-type" terms
    /// 6R(X,Y,T,W) = −R(W+X,Y,W+X,T) + R(W−X,Y,W−X,T) − R(T−X,Y,T−X,W) + R(T+X,Y,T+X,W).
    pub fn polarized_curvature(
        &self,
        x: &[f64],
        t: &[f64],
        xv: &[f64],
        yv: &[f64],
        wv: &[f64],
    ) -> Result<f64> {
        let r = self.curvature_tensor(x, t)?;
        Ok(self.polarized_with(&r, x, t, xv, yv, wv))
    }

    pub(crate) fn polarized_with(
        &self,
        r: &CurvatureTensor,
        x: &[f64],
        t: &[f64],
        xv: &[f64],
        yv: &[f64],
        wv: &[f64],
    ) -> f64 {
        let comb = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(p, q)| p + s * q).collect()
        };
        let w_plus = comb(wv, 1.0, xv);
        let w_minus = comb(wv, -1.0, xv);
        let t_minus = comb(t, -1.0, xv);
        let t_plus = comb(t, 1.0, xv);
        let term = |u: &[f64], last: &[f64]| self.curvature_form_with(r, x, t, u, yv, u, last);
        (-term(&w_plus, t) + term(&w_minus, t) - term(&t_minus, wv) + term(&t_plus, wv)) / 6.0
    }

    /// T-curvature g_y(vʲvᵏ(Γ^i_jk(x,v) − Γ^i_jk(x,y))∂_i, y) for y, v on the
    /// indicatrix.
    pub fn t_curvature(&self, x: &[f64], y: &[f64], v: &[f64]) -> Result<f64> {
        self.check_nonzero(x, y)?;
        self.check_nonzero(x, v)?;
        for (name, w) in [("y", y), ("v", v)] {
            let f = self.f(x, w);
            if (f - 1.0).abs() > 1e-10 {
                return Err(FinslerError::UnnormalizedInput(format!(
                    "F(x, {name}) = {f}"
                )));
            }
        }
        if self.is_riemannian() || self.is_locally_minkowski() {
            return Ok(0.0);
        }
        self.t_curvature_unchecked(x, y, v)
    }

    pub(crate) fn t_curvature_unchecked(&self, x: &[f64], y: &[f64], v: &[f64]) -> Result<f64> {
        let gv = self.chern_unchecked(x, v)?;
        let gy = self.chern_unchecked(x, y)?;
        let vv = Vector::from_column_slice(v);
        let diff = gv.contract_pair(&vv, &vv) - gy.contract_pair(&vv, &vv);
        let yv = Vector::from_column_slice(y);
        Ok(yv.dot(&(self.g(x, y) * diff)))
    }
}
