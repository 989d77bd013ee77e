//! Finsler metrics on a single chart and their pointwise tensors.

pub mod catalog;
pub mod field;
pub mod measure;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FinslerError, Result};
use crate::numeric::{central4, Matrix, Tensor3, Vector};

pub use field::{CoefficientField, GridTable};

pub type NormFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Coordinate chart: per-axis periodicity, an optional compact domain used
/// for volumes, the box that samplers draw base points from, and a radius
/// below which shooting from sample-box points is expected to converge.
#[derive(Clone, Debug)]
pub struct Chart {
    periods: Vec<Option<f64>>,
    domain: Option<Vec<(f64, f64)>>,
    sample_box: Vec<(f64, f64)>,
    safe_radius: f64,
}

impl Chart {
    pub fn new(
        periods: Vec<Option<f64>>,
        domain: Option<Vec<(f64, f64)>>,
        sample_box: Vec<(f64, f64)>,
        safe_radius: f64,
    ) -> Result<Self> {
        let n = periods.len();
        if sample_box.len() != n || domain.as_ref().is_some_and(|d| d.len() != n) {
            return Err(FinslerError::Config(
                "chart arrays disagree in length".into(),
            ));
        }
        if periods.iter().flatten().any(|p| !(*p > 0.0)) {
            return Err(FinslerError::Config("periods must be positive".into()));
        }
        Ok(Self {
            periods,
            domain,
            sample_box,
            safe_radius,
        })
    }

    /// Torus chart with every axis periodic.
    pub fn torus(periods: &[f64], safe_radius: f64) -> Self {
        Self {
            periods: periods.iter().map(|&p| Some(p)).collect(),
            domain: None,
            sample_box: periods.iter().map(|&p| (0.0, p)).collect(),
            safe_radius,
        }
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[Option<f64>] {
        &self.periods
    }

    pub fn is_periodic(&self) -> bool {
        self.periods.iter().any(Option::is_some)
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.sample_box
    }

    pub fn safe_radius(&self) -> f64 {
        self.safe_radius
    }

    /// Reduces periodic coordinates into `[0, period)`.
    pub fn reduce(&self, x: &mut [f64]) {
        for (xi, p) in x.iter_mut().zip(&self.periods) {
            if let Some(p) = p {
                let mut r = xi.rem_euclid(*p);
                if r >= *p {
                    r -= p;
                }
                *xi = r;
            }
        }
    }

    /// The compact coordinate box that volumes integrate over.
    pub fn fundamental_domain(&self) -> Result<Vec<(f64, f64)>> {
        if let Some(d) = &self.domain {
            return Ok(d.clone());
        }
        self.periods
            .iter()
            .map(|p| p.map(|p| (0.0, p)).ok_or(FinslerError::NonCompactChart))
            .collect()
    }

    /// All lattice translates with entries in {−P, 0, P} on periodic axes.
    pub fn deck_translates(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![]];
        for p in &self.periods {
            let choices: Vec<f64> = match p {
                Some(p) => vec![0.0, -p, *p],
                None => vec![0.0],
            };
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |c| {
                        let mut v = prefix.clone();
                        v.push(*c);
                        v
                    })
                })
                .collect();
        }
        out
    }

    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.sample_box
            .iter()
            .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }

    pub fn clamp_to_sample_box(&self, x: &mut [f64]) {
        for (xi, &(lo, hi)) in x.iter_mut().zip(&self.sample_box) {
            *xi = xi.clamp(lo, hi);
        }
    }
}

/// A base point with its periodic coordinates reduced.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
    pub periods: Vec<Option<f64>>,
}

impl ChartPoint {
    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

/// A tangent vector `dir` based at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    pub base: ChartPoint,
    pub dir: Vec<f64>,
}

#[derive(Clone)]
#[allow(clippy::large_enum_variant)]
pub enum MetricForm {
    /// `F = √(a_ij yⁱyʲ) + b_i yⁱ`; Riemannian when `b` is absent.
    Randers {
        a: CoefficientField,
        b: Option<CoefficientField>,
    },
    /// Arbitrary norm given only through its values.
    General(NormFn),
}

impl fmt::Debug for MetricForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricForm::Randers { a, b } => f
                .debug_struct("Randers")
                .field("a", a)
                .field("b", b)
                .finish(),
            MetricForm::General(_) => f.write_str("General(..)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    /// Closed-form fundamental tensor (Randers family only).
    Analytic,
    /// Fundamental tensor from differences of F² with the given base step.
    FiniteDifference { step: f64 },
}

/// Difference steps, each scaled by `max(1, ‖y‖)` where it acts on y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSizes {
    pub x: f64,
    pub y: f64,
    pub curvature: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self {
            x: 1e-4,
            y: 1e-5,
            curvature: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ModelFlags {
    pub claimed_berwald: bool,
    pub claimed_reversible: bool,
}

pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct MetricModel {
    name: String,
    dim: usize,
    chart: Chart,
    form: MetricForm,
    derivatives: DerivativeMode,
    steps: StepSizes,
    flags: ModelFlags,
}

impl MetricModel {
    pub fn new(
        name: impl Into<String>,
        chart: Chart,
        form: MetricForm,
        flags: ModelFlags,
    ) -> Result<Self> {
        let dim = chart.dim();
        if dim == 0 {
            return Err(FinslerError::Config("dimension must be positive".into()));
        }
        let derivatives = match form {
            MetricForm::Randers { ref a, ref b } => {
                if a.components() != dim * dim {
                    return Err(FinslerError::DimensionMismatch {
                        expected: dim * dim,
                        got: a.components(),
                    });
                }
                if let Some(b) = b {
                    if b.components() != dim {
                        return Err(FinslerError::DimensionMismatch {
                            expected: dim,
                            got: b.components(),
                        });
                    }
                }
                DerivativeMode::Analytic
            }
            MetricForm::General(_) => DerivativeMode::FiniteDifference {
                step: DEFAULT_FD_STEP,
            },
        };
        let model = Self {
            name: name.into(),
            dim,
            chart,
            form,
            derivatives,
            steps: StepSizes::default(),
            flags,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks positivity of `a` and the Randers bound `‖b‖_a < 1` on a probe
    /// grid over the sample box.
    fn validate(&self) -> Result<()> {
        let MetricForm::Randers { a, b } = &self.form else {
            return Ok(());
        };
        let probes = self.probe_points();
        for x in &probes {
            let am = a.matrix(x, self.dim);
            let Some(chol) = am.clone().cholesky() else {
                return Err(FinslerError::InvalidMetric(format!(
                    "a_ij is not positive definite at {x:?}"
                )));
            };
            if let Some(b) = b {
                let bv = b.vector(x);
                let norm2 = bv.dot(&chol.solve(&bv));
                if norm2 >= 1.0 {
                    return Err(FinslerError::InvalidMetric(format!(
                        "‖b‖_a = {:.6} ≥ 1 at {x:?}",
                        norm2.sqrt()
                    )));
                }
            }
        }
        Ok(())
    }

    fn probe_points(&self) -> Vec<Vec<f64>> {
        let per_axis = match self.dim {
            1 => 33,
            2 => 17,
            3 => 7,
            _ => 3,
        };
        let mut pts = vec![vec![]];
        for &(lo, hi) in self.chart.sample_box() {
            pts = pts
                .into_iter()
                .flat_map(|prefix| {
                    (0..per_axis).map(move |i| {
                        let mut v = prefix.clone();
                        v.push(lo + (hi - lo) * i as f64 / (per_axis - 1) as f64);
                        v
                    })
                })
                .collect();
        }
        pts
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Result<Self> {
        if let DerivativeMode::FiniteDifference { step } = mode {
            if !(step > 0.0) {
                return Err(FinslerError::InvalidParameter(
                    "fd_step must be positive".into(),
                ));
            }
        }
        if mode == DerivativeMode::Analytic && matches!(self.form, MetricForm::General(_)) {
            return Err(FinslerError::InvalidParameter(
                "analytic derivatives are only available for Randers-type metrics".into(),
            ));
        }
        self.derivatives = mode;
        Ok(self)
    }

    pub fn with_steps(mut self, steps: StepSizes) -> Self {
        self.steps = steps;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn form(&self) -> &MetricForm {
        &self.form
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.derivatives
    }

    pub fn steps(&self) -> StepSizes {
        self.steps
    }

    pub fn flags(&self) -> ModelFlags {
        self.flags
    }

    /// True when the fundamental tensor does not depend on y.
    pub fn is_riemannian(&self) -> bool {
        matches!(self.form, MetricForm::Randers { b: None, .. })
    }

    /// True when F does not depend on x (constant coefficients).
    pub fn is_locally_minkowski(&self) -> bool {
        match &self.form {
            MetricForm::Randers { a, b } => {
                a.is_constant() && b.as_ref().is_none_or(|b| b.is_constant())
            }
            MetricForm::General(_) => false,
        }
    }

    pub fn point(&self, coords: &[f64]) -> Result<ChartPoint> {
        self.check_dim(coords)?;
        let mut c = coords.to_vec();
        self.chart.reduce(&mut c);
        Ok(ChartPoint {
            coords: c,
            periods: self.chart.periods().to_vec(),
        })
    }

    pub(crate) fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(FinslerError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_nonzero(&self, x: &[f64], y: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        if y.iter().all(|v| *v == 0.0) {
            return Err(FinslerError::ZeroVector);
        }
        Ok(())
    }

    /// F(x, y).
    pub fn eval_f(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.f(x, y))
    }

    pub(crate) fn f(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.form {
            MetricForm::Randers { a, b } => {
                let av = a.eval(x);
                let n = self.dim;
                let mut q = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        q += av[i * n + j] * y[i] * y[j];
                    }
                }
                let alpha = q.max(0.0).sqrt();
                let beta = b
                    .as_ref()
                    .map(|b| b.eval(x).iter().zip(y).map(|(bi, yi)| bi * yi).sum::<f64>())
                    .unwrap_or(0.0);
                alpha + beta
            }
            MetricForm::General(f) => {
                if y.iter().all(|v| *v == 0.0) {
                    0.0
                } else {
                    f(x, y)
                }
            }
        }
    }

    pub(crate) fn fv(&self, x: &[f64], y: &Vector) -> f64 {
        self.f(x, y.as_slice())
    }

    /// g_ij(x, y) = ½ ∂²F²/∂yⁱ∂yʲ, checked for positive definiteness.
    pub fn fundamental_tensor(&self, x: &[f64], y: &[f64]) -> Result<Matrix> {
        self.check_nonzero(x, y)?;
        let g = self.g(x, y);
        if !g.iter().all(|v| v.is_finite()) || g.clone().cholesky().is_none() {
            return Err(FinslerError::NotPositiveDefinite);
        }
        Ok(g)
    }

    /// Unchecked fundamental tensor.
    pub(crate) fn g(&self, x: &[f64], y: &[f64]) -> Matrix {
        match (&self.form, self.derivatives) {
            (MetricForm::Randers { a, b }, DerivativeMode::Analytic) => {
                let am = a.matrix(x, self.dim);
                match b {
                    None => am,
                    Some(b) => randers_tensor(&am, &b.vector(x), &Vector::from_column_slice(y)),
                }
            }
            (_, DerivativeMode::FiniteDifference { step }) => self.g_from_differences(x, y, step),
            (MetricForm::General(_), DerivativeMode::Analytic) => {
                self.g_from_differences(x, y, DEFAULT_FD_STEP)
            }
        }
    }

    pub(crate) fn gv(&self, x: &[f64], y: &Vector) -> Matrix {
        self.g(x, y.as_slice())
    }

    /// Hessian of ½F² in y by nested fourth-order central differences.
    fn g_from_differences(&self, x: &[f64], y: &[f64], step: f64) -> Matrix {
        let n = self.dim;
        let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let h = step * scale;
        let half_sq = |yy: &[f64]| {
            let f = self.f(x, yy);
            0.5 * f * f
        };
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let d = central4(h, |s| {
                    let mut yi = y.to_vec();
                    yi[i] += s;
                    central4(h, |t| {
                        let mut yj = yi.clone();
                        yj[j] += t;
                        vec![half_sq(&yj)]
                    })
                });
                g[(i, j)] = d[0];
                g[(j, i)] = d[0];
            }
        }
        g
    }

    pub(crate) fn g_inverse(&self, g: &Matrix) -> Result<Matrix> {
        g.clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or(FinslerError::SingularTensor)
    }

    pub(crate) fn y_step(&self, y: &[f64]) -> f64 {
        self.steps.y * y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0)
    }

    /// ∂g_ij/∂x^k, returned as one matrix per k.
    pub(crate) fn dg_dx(&self, x: &[f64], y: &[f64]) -> Vec<Matrix> {
        let n = self.dim;
        if self.is_locally_minkowski() {
            return vec![Matrix::zeros(n, n); n];
        }
        let h = self.steps.x;
        (0..n)
            .map(|k| {
                let d = central4(h, |s| {
                    let mut xs = x.to_vec();
                    xs[k] += s;
                    self.g(&xs, y).as_slice().to_vec()
                });
                Matrix::from_column_slice(n, n, &d)
            })
            .collect()
    }

    /// ∂g_ij/∂y^k, returned as one matrix per k.
    pub(crate) fn dg_dy(&self, x: &[f64], y: &[f64]) -> Vec<Matrix> {
        let n = self.dim;
        if self.is_riemannian() && self.derivatives == DerivativeMode::Analytic {
            return vec![Matrix::zeros(n, n); n];
        }
        let h = match self.derivatives {
            DerivativeMode::Analytic => self.y_step(y),
            // differentiating a differenced tensor needs a coarser step
            DerivativeMode::FiniteDifference { step } => {
                step * y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0)
            }
        };
        (0..n)
            .map(|k| {
                let d = central4(h, |s| {
                    let mut ys = y.to_vec();
                    ys[k] += s;
                    self.g(x, &ys).as_slice().to_vec()
                });
                Matrix::from_column_slice(n, n, &d)
            })
            .collect()
    }

    /// A_ijk = (F/2) ∂g_ij/∂y^k, symmetrized over all index permutations.
    pub fn cartan_tensor(&self, x: &[f64], y: &[f64]) -> Result<Tensor3> {
        self.check_nonzero(x, y)?;
        Ok(self.cartan(x, y))
    }

    pub(crate) fn cartan(&self, x: &[f64], y: &[f64]) -> Tensor3 {
        self.cartan_from(self.f(x, y), &self.dg_dy(x, y))
    }

    pub(crate) fn cartan_from(&self, f: f64, dg: &[Matrix]) -> Tensor3 {
        let n = self.dim;
        let half_f = 0.5 * f;
        let raw = |i: usize, j: usize, k: usize| dg[k][(i, j)];
        Tensor3::from_fn(n, |i, j, k| {
            half_f
                * (raw(i, j, k)
                    + raw(j, k, i)
                    + raw(k, i, j)
                    + raw(j, i, k)
                    + raw(i, k, j)
                    + raw(k, j, i))
                / 6.0
        })
    }

    /// ξ = g_y(y, ·); zero maps to zero.
    pub fn legendre(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let yv = Vector::from_column_slice(y);
        if y.iter().all(|v| *v == 0.0) {
            return Ok(yv);
        }
        Ok(self.g(x, y) * yv)
    }

    /// Solves g_y(y, ·) = ξ by damped Newton on the convex function ½F² − ξ·y,
    /// whose Hessian is exactly g_y.
    pub fn legendre_inverse(&self, x: &[f64], xi: &[f64], tol: f64) -> Result<Vector> {
        const MAX_ITER: usize = 50;
        self.check_dim(x)?;
        self.check_dim(xi)?;
        let xi = Vector::from_column_slice(xi);
        if xi.iter().all(|v| *v == 0.0) {
            return Err(FinslerError::ZeroVector);
        }
        let energy = |y: &Vector| 0.5 * self.fv(x, y).powi(2) - xi.dot(y);
        let mut y = self.g_inverse(&self.gv(x, &xi))? * &xi;
        let scale = xi.norm().max(1.0);
        for _ in 0..MAX_ITER {
            let g = self.gv(x, &y);
            let residual = &g * &y - &xi;
            if residual.norm() <= tol * scale {
                return Ok(y);
            }
            let step = g
                .clone()
                .cholesky()
                .ok_or(FinslerError::NotPositiveDefinite)?
                .solve(&residual);
            let e0 = energy(&y);
            let r0 = residual.norm();
            // near the solution energy differences drop to roundoff, so a
            // step that shrinks the residual is accepted as well
            let worse =
                |next: &Vector| energy(next) > e0 && (&self.gv(x, next) * next - &xi).norm() >= r0;
            let mut t = 1.0;
            let mut next = &y - &step * t;
            while worse(&next) && t > 1e-8 {
                t *= 0.5;
                next = &y - &step * t;
            }
            y = next;
        }
        let g = self.gv(x, &y);
        if (&g * &y - &xi).norm() <= tol * scale {
            return Ok(y);
        }
        Err(FinslerError::LegendreDiverged {
            iterations: MAX_ITER,
        })
    }
}

/// Closed-form fundamental tensor of `F = α + β` with α² = yᵀay, β = b·y:
/// `g = (F/α)(a − ỹỹᵀ) + (ỹ + b)(ỹ + b)ᵀ`, where ỹ = ay/α.
pub fn randers_tensor(a: &Matrix, b: &Vector, y: &Vector) -> Matrix {
    let ay = a * y;
    let alpha = y.dot(&ay).sqrt();
    let l = ay / alpha;
    let f = alpha + b.dot(y);
    let lb = &l + b;
    (a - &l * l.transpose()) * (f / alpha) + &lb * lb.transpose()
}
