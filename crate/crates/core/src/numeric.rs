//! Small numerical building blocks shared by the geometry modules:
//! finite-difference stencils, a dense rank-3 tensor, fixed-step RK4,
//! Nelder–Mead, and seeded sampling helpers.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Fourth-order central difference of a vector-valued function of one variable.
pub fn central4(h: f64, f: impl Fn(f64) -> Vec<f64>) -> Vec<f64> {
    let p2 = f(2.0 * h);
    let p1 = f(h);
    let m1 = f(-h);
    let m2 = f(-2.0 * h);
    p2.iter()
        .zip(&p1)
        .zip(m1.iter().zip(&m2))
        .map(|((a, b), (c, d))| (-a + 8.0 * b - 8.0 * c + d) / (12.0 * h))
        .collect()
}

/// A dense n×n×n array indexed `[i][j][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t.data[(i * n + j) * n + k] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn from_vec(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n * n);
        Self { n, data }
    }

    /// `t[i][j][k] v^k`
    pub fn contract_last(&self, v: &Vector) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(i, j, k) * v[k]).sum())
    }

    /// `t[i][j][k] u^j v^k`
    pub fn contract_pair(&self, u: &Vector, v: &Vector) -> Vector {
        let n = self.n;
        Vector::from_fn(n, |i, _| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += self.get(i, j, k) * u[j] * v[k];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Classical RK4 step on a flat state vector.
pub fn rk4_step(state: &[f64], dt: f64, rhs: &mut impl FnMut(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    let k1 = rhs(state);
    let k2 = rhs(&axpy(state, 0.5 * dt, &k1));
    let k3 = rhs(&axpy(state, 0.5 * dt, &k2));
    let k4 = rhs(&axpy(state, dt, &k3));
    state
        .iter()
        .enumerate()
        .map(|(i, s)| s + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes `f` with the Nelder–Mead simplex method.
pub fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: &[f64],
    scale: f64,
    max_evals: usize,
    ftol: f64,
) -> NelderMeadResult {
    let m = start.len();
    let mut evals = 0usize;
    let mut eval = |p: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
    let v0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..m {
        let mut p = start.to_vec();
        p[i] += scale;
        let v = eval(&p, &mut evals);
        simplex.push((p, v));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[m].1;
        if (worst - best).abs() <= ftol * (best.abs() + worst.abs()).max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..m)
            .map(|d| simplex[..m].iter().map(|(p, _)| p[d]).sum::<f64>() / m as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..m)
                .map(|d| centroid[d] + t * (simplex[m].0[d] - centroid[d]))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < simplex[0].1 {
            let expanded = along(-2.0);
            let fe = eval(&expanded, &mut evals);
            simplex[m] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[m - 1].1 {
            simplex[m] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < simplex[m].1 {
                let c = along(-0.5);
                let v = eval(&c, &mut evals);
                (c, v)
            } else {
                let c = along(0.5);
                let v = eval(&c, &mut evals);
                (c, v)
            };
            if fc < simplex[m].1.min(fr) {
                simplex[m] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let best_point = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = vertex
                        .0
                        .iter()
                        .zip(&best_point)
                        .map(|(x, b)| b + 0.5 * (x - b))
                        .collect();
                    let v = eval(&p, &mut evals);
                    *vertex = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    NelderMeadResult {
        point,
        value,
        evaluations: evals,
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (nodes, weights)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A direction drawn uniformly from the Euclidean unit sphere.
pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Symmetric part `(m + mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
pub fn power_iteration_norm(m: &Matrix, iterations: usize) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = Vector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v /= v.norm();
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = m * &v;
        let norm = w.norm();
        if norm < 1e-300 {
            return 0.0;
        }
        estimate = norm;
        v = w / norm;
    }
    estimate
}
