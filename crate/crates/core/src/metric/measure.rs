//! Indicatrix sampling and quadrature: the average Riemannian metric and the
//! Busemann–Hausdorff / Holmes–Thompson volume densities.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::numeric::{gauss_legendre, random_unit, seeded_rng, Matrix, Vector};

use super::MetricModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VolumeMeasure {
    /// Busemann–Hausdorff: ω_n / Leb(B_xM).
    #[serde(alias = "bh")]
    Bh,
    /// Holmes–Thompson: (1/ω_n) ∫_{B_xM} det g_y dy.
    #[serde(alias = "ht")]
    Ht,
}

/// Volume of the Euclidean unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * TAU / n as f64,
    }
}

/// Area of the Euclidean unit sphere S^m ⊂ ℝ^{m+1}.
pub fn unit_sphere_area(m: usize) -> f64 {
    (m + 1) as f64 * unit_ball_volume(m + 1)
}

/// A quadrature rule on the Euclidean unit sphere of the tangent space:
/// points `u`, weights `dσ`, and the coordinate tangent vectors of the
/// parametrization at each point.
struct SphereRule {
    points: Vec<Vector>,
    weights: Vec<f64>,
    tangents: Vec<Vec<Vector>>,
}

fn sphere_rule(dim: usize, order: usize) -> Result<SphereRule> {
    match dim {
        2 => {
            if order < 8 {
                return Err(FinslerError::DegenerateQuadrature { order, dim });
            }
            let h = TAU / order as f64;
            let mut rule = SphereRule {
                points: vec![],
                weights: vec![],
                tangents: vec![],
            };
            for i in 0..order {
                let phi = h * i as f64;
                rule.points
                    .push(Vector::from_vec(vec![phi.cos(), phi.sin()]));
                rule.weights.push(h);
                rule.tangents
                    .push(vec![Vector::from_vec(vec![-phi.sin(), phi.cos()])]);
            }
            Ok(rule)
        }
        3 => {
            if order < 6 {
                return Err(FinslerError::DegenerateQuadrature { order, dim });
            }
            // Gauss–Legendre in z = cos θ, uniform in φ; dσ = dz dφ
            let (zs, wz) = gauss_legendre(order);
            let m_phi = 2 * order;
            let h = TAU / m_phi as f64;
            let mut rule = SphereRule {
                points: vec![],
                weights: vec![],
                tangents: vec![],
            };
            for (z, w) in zs.iter().zip(&wz) {
                let r = (1.0 - z * z).sqrt();
                for j in 0..m_phi {
                    let phi = h * j as f64;
                    let (s, c) = phi.sin_cos();
                    rule.points.push(Vector::from_vec(vec![r * c, r * s, *z]));
                    rule.weights.push(w * h);
                    rule.tangents.push(vec![
                        Vector::from_vec(vec![-z / r * c, -z / r * s, 1.0]),
                        Vector::from_vec(vec![-r * s, r * c, 0.0]),
                    ]);
                }
            }
            Ok(rule)
        }
        d => Err(FinslerError::UnsupportedDimension(d)),
    }
}

impl MetricModel {
    /// `count` points of the indicatrix at x: seeded Euclidean-uniform
    /// directions radially rescaled to F = 1.
    pub fn indicatrix_sample(&self, x: &[f64], count: usize, seed: u64) -> Result<Vec<Vector>> {
        self.check_dim(x)?;
        if count == 0 {
            return Err(FinslerError::InvalidParameter(
                "count must be at least 1".into(),
            ));
        }
        let mut rng = seeded_rng(seed);
        Ok((0..count)
            .map(|_| {
                let u = random_unit(&mut rng, self.dim);
                let f = self.fv(x, &u);
                u / f
            })
            .collect())
    }

    /// g̃_x: the average of g_y over the indicatrix against its induced
    /// Riemannian measure.
    pub fn average_metric(&self, x: &[f64], order: usize) -> Result<Matrix> {
        self.check_dim(x)?;
        let rule = sphere_rule(self.dim, order)?;
        let n = self.dim;
        let mut acc = Matrix::zeros(n, n);
        let mut total = 0.0;
        for ((u, w), tangents) in rule.points.iter().zip(&rule.weights).zip(&rule.tangents) {
            let g = self.gv(x, u);
            let f = self.fv(x, u);
            // tangent of y = u/F(u) along each parameter direction
            let dy: Vec<Vector> = tangents
                .iter()
                .map(|du| {
                    let df = u.dot(&(&g * du)) / f;
                    du / f - u * (df / (f * f))
                })
                .collect();
            let gram = Matrix::from_fn(dy.len(), dy.len(), |a, b| dy[a].dot(&(&g * &dy[b])));
            let dnu = gram.determinant().max(0.0).sqrt() * w;
            acc += &g * dnu;
            total += dnu;
        }
        if !(total > 0.0) {
            return Err(FinslerError::DegenerateQuadrature { order, dim: n });
        }
        Ok(crate::numeric::symmetrize(&(acc / total)))
    }

    /// Volume density of the chosen measure relative to coordinate Lebesgue measure.
    pub fn volume_density(&self, x: &[f64], measure: VolumeMeasure) -> Result<f64> {
        self.volume_density_with_order(x, measure, default_order(self.dim))
    }

    pub fn volume_density_with_order(
        &self,
        x: &[f64],
        measure: VolumeMeasure,
        order: usize,
    ) -> Result<f64> {
        self.check_dim(x)?;
        let n = self.dim;
        if n == 1 {
            // the unit "ball" is an interval of length 1/F(1) + 1/F(−1)
            let len = 1.0 / self.f(x, &[1.0]) + 1.0 / self.f(x, &[-1.0]);
            return Ok(match measure {
                VolumeMeasure::Bh => 2.0 / len,
                VolumeMeasure::Ht => 0.5 * (self.f(x, &[1.0]) + self.f(x, &[-1.0])),
            });
        }
        if self.is_riemannian() {
            // both measures reduce to √det g; exact even where g is very eccentric
            let any = vec![1.0; n];
            return Ok(self.g(x, &any).determinant().max(0.0).sqrt());
        }
        let rule = sphere_rule(n, order)?;
        let omega = unit_ball_volume(n);
        let mut integral = 0.0;
        for (u, w) in rule.points.iter().zip(&rule.weights) {
            let f = self.fv(x, u);
            let radial = f.powi(-(n as i32)) / n as f64;
            integral += w
                * radial
                * match measure {
                    VolumeMeasure::Bh => 1.0,
                    VolumeMeasure::Ht => self.gv(x, u).determinant(),
                };
        }
        Ok(match measure {
            VolumeMeasure::Bh => omega / integral,
            VolumeMeasure::Ht => integral / omega,
        })
    }

    /// Total volume over the chart's fundamental domain: midpoint rule with
    /// `order` nodes per axis, and `order` angular nodes for the density.
    pub fn volume(&self, measure: VolumeMeasure, order: usize) -> Result<f64> {
        let domain = self.chart.fundamental_domain()?;
        let cell: f64 = domain.iter().map(|(lo, hi)| hi - lo).product();
        if self.is_locally_minkowski() {
            let x: Vec<f64> = domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
            return Ok(cell * self.volume_density_with_order(&x, measure, order.max(8))?);
        }
        let n = self.dim;
        let total_nodes = order.pow(n as u32);
        let mut sum = 0.0;
        for flat in 0..total_nodes {
            let mut rem = flat;
            let x: Vec<f64> = domain
                .iter()
                .map(|(lo, hi)| {
                    let i = rem % order;
                    rem /= order;
                    lo + (hi - lo) * (i as f64 + 0.5) / order as f64
                })
                .collect();
            sum += self.volume_density_with_order(&x, measure, order.max(8))?;
        }
        Ok(cell * sum / total_nodes as f64)
    }
}

fn default_order(dim: usize) -> usize {
    if dim == 2 {
        256
    } else {
        48
    }
}
