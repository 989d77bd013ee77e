//! Formal Christoffel symbols, nonlinear connection, Chern connection and
//! geodesic spray in chart coordinates.

use serde::Serialize;

use crate::error::Result;
use crate::metric::MetricModel;
use crate::numeric::{Matrix, Tensor3, Vector};

/// All connection data at one point of the slit tangent bundle.
#[derive(Clone, Debug)]
pub struct ConnectionCoeffs {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Formal Christoffel symbols γ^i_jk.
    pub gamma: Tensor3,
    /// Nonlinear connection N^i_j.
    pub nonlinear: Matrix,
    /// Chern connection Γ^i_jk, symmetric in (j, k) by construction.
    pub chern: Tensor3,
}

/// Result of a Berwald-defect sweep over sampled directions.
#[derive(Clone, Debug, Serialize)]
pub struct BerwaldSweep {
    pub max_defect: f64,
    pub samples: usize,
    pub numerically_berwald: bool,
}

pub const BERWALD_THRESHOLD: f64 = 1e-6;

impl MetricModel {
    fn christoffel_from(&self, ginv: &Matrix, dgx: &[Matrix]) -> Tensor3 {
        let n = self.dim();
        // lowered symbols γ_ljk = ½(∂_k g_lj + ∂_j g_lk − ∂_l g_jk)
        let lowered = Tensor3::from_fn(n, |l, j, k| {
            0.5 * (dgx[k][(l, j)] + dgx[j][(l, k)] - dgx[l][(j, k)])
        });
        let mut gamma = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let v: f64 = (0..n).map(|l| ginv[(i, l)] * lowered.get(l, j, k)).sum();
                    gamma.set(i, j, k, v);
                    gamma.set(i, k, j, v);
                }
            }
        }
        gamma
    }

    /// γ^i_jk(x, y) built from ∂g/∂x at fixed y.
    pub fn formal_christoffel(&self, x: &[f64], y: &[f64]) -> Result<Tensor3> {
        self.check_nonzero(x, y)?;
        let n = self.dim();
        if self.is_locally_minkowski() {
            return Ok(Tensor3::zeros(n));
        }
        let ginv = self.g_inverse(&self.g(x, y))?;
        Ok(self.christoffel_from(&ginv, &self.dg_dx(x, y)))
    }

    /// Spray coefficients G^i = ½ γ^i_jk yʲyᵏ; geodesics satisfy ẍ = −2G.
    pub fn geodesic_spray(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        self.check_nonzero(x, y)?;
        self.spray(x, y)
    }

    pub(crate) fn spray(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        let n = self.dim();
        if self.is_locally_minkowski() || y.iter().all(|v| *v == 0.0) {
            return Ok(Vector::zeros(n));
        }
        let ginv = self.g_inverse(&self.g(x, y))?;
        let gamma = self.christoffel_from(&ginv, &self.dg_dx(x, y));
        let yv = Vector::from_column_slice(y);
        Ok(gamma.contract_pair(&yv, &yv) * 0.5)
    }

    /// Full connection data at (x, y).
    pub fn connection(&self, x: &[f64], y: &[f64]) -> Result<ConnectionCoeffs> {
        self.check_nonzero(x, y)?;
        self.connection_unchecked(x, y)
    }

    pub(crate) fn connection_unchecked(&self, x: &[f64], y: &[f64]) -> Result<ConnectionCoeffs> {
        let n = self.dim();
        if self.is_locally_minkowski() {
            return Ok(ConnectionCoeffs {
                x: x.to_vec(),
                y: y.to_vec(),
                gamma: Tensor3::zeros(n),
                nonlinear: Matrix::zeros(n, n),
                chern: Tensor3::zeros(n),
            });
        }
        let g = self.g(x, y);
        let ginv = self.g_inverse(&g)?;
        let dgx = self.dg_dx(x, y);
        let gamma = self.christoffel_from(&ginv, &dgx);
        let yv = Vector::from_column_slice(y);
        let riemannian = self.is_riemannian();

        let (nonlinear, dgy) = if riemannian {
            (gamma.contract_last(&yv), None)
        } else {
            let dgy = self.dg_dy(x, y);
            (self.nonlinear_from(x, y, &ginv, &gamma, &dgy), Some(dgy))
        };

        let chern = match dgy {
            None => gamma.clone(),
            Some(dgy) => {
                // δ_k g_ij = ∂_k g_ij − N^m_k ∂g_ij/∂y^m
                let delta: Vec<Matrix> = (0..n)
                    .map(|k| {
                        let mut d = dgx[k].clone();
                        for (m, dgm) in dgy.iter().enumerate() {
                            d -= dgm * nonlinear[(m, k)];
                        }
                        d
                    })
                    .collect();
                let lowered = Tensor3::from_fn(n, |i, j, k| {
                    0.5 * (delta[k][(i, j)] + delta[j][(i, k)] - delta[i][(j, k)])
                });
                let mut chern = Tensor3::zeros(n);
                for l in 0..n {
                    for j in 0..n {
                        for k in j..n {
                            let v: f64 = (0..n).map(|i| ginv[(l, i)] * lowered.get(i, j, k)).sum();
                            chern.set(l, j, k, v);
                            chern.set(l, k, j, v);
                        }
                    }
                }
                chern
            }
        };

        Ok(ConnectionCoeffs {
            x: x.to_vec(),
            y: y.to_vec(),
            gamma,
            nonlinear,
            chern,
        })
    }

    /// N^i_j = γ^i_jk yᵏ − (1/F) A^i_jk γ^k_rs yʳyˢ.
    fn nonlinear_from(
        &self,
        x: &[f64],
        y: &[f64],
        ginv: &Matrix,
        gamma: &Tensor3,
        dgy: &[Matrix],
    ) -> Matrix {
        let n = self.dim();
        let yv = Vector::from_column_slice(y);
        let f = self.f(x, y);
        let cartan = self.cartan_from(f, dgy);
        // Cartan tensor with its first index raised
        let raised = Tensor3::from_fn(n, |i, j, k| {
            (0..n).map(|l| ginv[(i, l)] * cartan.get(l, j, k)).sum()
        });
        let gyy = gamma.contract_pair(&yv, &yv);
        gamma.contract_last(&yv) - raised.contract_last(&gyy) / f
    }

    pub fn nonlinear_connection(&self, x: &[f64], y: &[f64]) -> Result<Matrix> {
        self.check_nonzero(x, y)?;
        self.nonlinear_unchecked(x, y)
    }

    pub(crate) fn nonlinear_unchecked(&self, x: &[f64], y: &[f64]) -> Result<Matrix> {
        let n = self.dim();
        if self.is_locally_minkowski() {
            return Ok(Matrix::zeros(n, n));
        }
        let ginv = self.g_inverse(&self.g(x, y))?;
        let gamma = self.christoffel_from(&ginv, &self.dg_dx(x, y));
        if self.is_riemannian() {
            return Ok(gamma.contract_last(&Vector::from_column_slice(y)));
        }
        Ok(self.nonlinear_from(x, y, &ginv, &gamma, &self.dg_dy(x, y)))
    }

    pub fn chern_coefficients(&self, x: &[f64], y: &[f64]) -> Result<Tensor3> {
        Ok(self.connection(x, y)?.chern)
    }

    pub(crate) fn chern_unchecked(&self, x: &[f64], y: &[f64]) -> Result<Tensor3> {
        Ok(self.connection_unchecked(x, y)?.chern)
    }

    /// max |Γ(x, y₁) − Γ(x, y₂)|.
    pub fn berwald_defect(&self, x: &[f64], y1: &[f64], y2: &[f64]) -> Result<f64> {
        let a = self.chern_coefficients(x, y1)?;
        let b = self.chern_coefficients(x, y2)?;
        Ok(a.max_abs_diff(&b))
    }

    /// Largest Berwald defect over `samples` random base points and pairs of
    /// indicatrix directions.
    pub fn berwald_sweep(&self, samples: usize, seed: u64) -> Result<BerwaldSweep> {
        let mut rng = crate::numeric::seeded_rng(seed);
        let mut worst = 0.0f64;
        for s in 0..samples {
            let x = self.chart().sample_point(&mut rng);
            let ys = self.indicatrix_sample(&x, 2, seed.wrapping_add(s as u64 + 1))?;
            worst = worst.max(self.berwald_defect(&x, ys[0].as_slice(), ys[1].as_slice())?);
        }
        Ok(BerwaldSweep {
            max_defect: worst,
            samples,
            numerically_berwald: worst < BERWALD_THRESHOLD,
        })
    }
}
