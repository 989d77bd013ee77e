//! Python bindings: a `Metric` class over the core model plus the bound
//! evaluators and report-producing operations (returned as dicts).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use finsler_core::bounds;
use finsler_core::centermass::{center_of_mass, MassDistribution};
use finsler_core::config::MetricConfig;
use finsler_core::flows::{DEFAULT_SHOOTING_ITERATIONS, DEFAULT_SHOOTING_TOL};
use finsler_core::invariants::{invariant_report, InvariantSettings};
use finsler_core::metric::measure::VolumeMeasure;
use finsler_core::verify::{run_suite, SuiteConfig};
use finsler_core::{catalog, FinslerError, MetricModel};

fn err(e: FinslerError) -> PyErr {
    match e {
        FinslerError::Config(_)
        | FinslerError::InvalidParameter(_)
        | FinslerError::InvalidMetric(_)
        | FinslerError::DimensionMismatch { .. }
        | FinslerError::ZeroVector
        | FinslerError::UnnormalizedInput(_)
        | FinslerError::DegenerateFlag
        | FinslerError::DegenerateTriangle => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Serializes through JSON so Python receives plain dicts, lists and floats.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn matrix_rows(m: &finsler_core::numeric::Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// A Finsler metric on a single (optionally periodic) chart.
#[pyclass(frozen, module = "finsler")]
struct Metric {
    inner: MetricModel,
}

#[pymethods]
impl Metric {
    /// Builds a metric from a JSON config string.
    #[staticmethod]
    fn from_config(json: &str) -> PyResult<Self> {
        let cfg = MetricConfig::from_json(json).map_err(err)?;
        Ok(Self {
            inner: cfg.build().map_err(err)?,
        })
    }

    #[staticmethod]
    fn euclidean(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: catalog::euclidean(n).map_err(err)?,
        })
    }

    /// Unit 2-sphere in stereographic coordinates.
    #[staticmethod]
    fn sphere() -> PyResult<Self> {
        Ok(Self {
            inner: catalog::sphere_stereographic().map_err(err)?,
        })
    }

    #[staticmethod]
    fn flat_torus() -> PyResult<Self> {
        Ok(Self {
            inner: catalog::flat_torus().map_err(err)?,
        })
    }

    #[staticmethod]
    fn berwald_torus(n: f64) -> PyResult<Self> {
        Ok(Self {
            inner: catalog::berwald_torus(n).map_err(err)?,
        })
    }

    #[staticmethod]
    fn randers_nonparallel(epsilon: f64) -> PyResult<Self> {
        Ok(Self {
            inner: catalog::randers_nonparallel(epsilon).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[pyo3(name = "F")]
    fn norm(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.inner.eval_f(&x, &y).map_err(err)
    }

    fn fundamental_tensor(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(matrix_rows(
            &self.inner.fundamental_tensor(&x, &y).map_err(err)?,
        ))
    }

    fn geodesic_spray(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .geodesic_spray(&x, &y)
            .map_err(err)?
            .as_slice()
            .to_vec())
    }

    fn flag_curvature(&self, x: Vec<f64>, y: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        self.inner.flag_curvature(&x, &y, &v).map_err(err)
    }

    fn t_curvature(&self, x: Vec<f64>, y: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        self.inner.t_curvature(&x, &y, &v).map_err(err)
    }

    fn exp_map(&self, x: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.exp_map(&x, &v).map_err(err)?.coords)
    }

    #[pyo3(signature = (x, q, tol = DEFAULT_SHOOTING_TOL, max_iter = DEFAULT_SHOOTING_ITERATIONS))]
    fn exp_inverse(
        &self,
        x: Vec<f64>,
        q: Vec<f64>,
        tol: f64,
        max_iter: usize,
    ) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .exp_inverse(&x, &q, tol, max_iter)
            .map_err(err)?
            .as_slice()
            .to_vec())
    }

    #[pyo3(signature = (p, q, tol = DEFAULT_SHOOTING_TOL))]
    fn distance(&self, p: Vec<f64>, q: Vec<f64>, tol: f64) -> PyResult<f64> {
        self.inner.distance(&p, &q, tol).map_err(err)
    }

    /// Total volume; `measure` is "bh" or "ht".
    #[pyo3(signature = (measure = "ht", order = 64))]
    fn volume(&self, measure: &str, order: usize) -> PyResult<f64> {
        let m = match measure.to_ascii_lowercase().as_str() {
            "bh" => VolumeMeasure::Bh,
            "ht" => VolumeMeasure::Ht,
            other => return Err(PyValueError::new_err(format!("unknown measure {other:?}"))),
        };
        self.inner.volume(m, order).map_err(err)
    }

    /// Full invariant report; settings as a JSON object string.
    #[pyo3(signature = (settings = "{}"))]
    fn invariants<'py>(&self, py: Python<'py>, settings: &str) -> PyResult<Bound<'py, PyAny>> {
        let s: InvariantSettings =
            serde_json::from_str(settings).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let report = py
            .detach(|| invariant_report(&self.inner, &s))
            .map_err(err)?;
        to_py(py, &report)
    }

    /// Runs a verification suite; config as a JSON object string.
    #[pyo3(signature = (config = "{}"))]
    fn verify<'py>(&self, py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
        let c: SuiteConfig =
            serde_json::from_str(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let report = py.detach(|| run_suite(&self.inner, &c)).map_err(err)?;
        to_py(py, &report)
    }

    /// Center of mass of weighted points (weights must sum to 1).
    #[pyo3(signature = (points, weights, start, tol = 1e-10, max_iter = 200))]
    fn center_of_mass<'py>(
        &self,
        py: Python<'py>,
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        start: Vec<f64>,
        tol: f64,
        max_iter: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let dist = MassDistribution::new(points, weights).map_err(err)?;
        let c = center_of_mass(&self.inner, &dist, &start, tol, max_iter).map_err(err)?;
        to_py(py, &c)
    }

    fn __repr__(&self) -> String {
        format!("Metric({:?}, dim={})", self.inner.name(), self.inner.dim())
    }
}

#[pyfunction]
#[pyo3(name = "thm1_1_injectivity_bound")]
fn injectivity_bound<'py>(
    py: Python<'py>,
    n: usize,
    k: f64,
    tau: f64,
    lambda_: f64,
    d: f64,
    v: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &bounds::thm1_1_injectivity_bound(n, k, tau, lambda_, d, v).map_err(err)?,
    )
}

#[pyfunction]
#[pyo3(name = "thm4_2_convexity_bound")]
fn convexity_bound<'py>(
    py: Python<'py>,
    k: f64,
    sigma: f64,
    lambda_: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &bounds::thm4_2_convexity_bound(k, sigma, lambda_).map_err(err)?,
    )
}

#[pyfunction]
fn s_k(k: f64, t: f64) -> f64 {
    bounds::s_k(k, t)
}

#[pyfunction]
fn t_frak(k: f64, lambda_: f64) -> f64 {
    bounds::t_frak(k, lambda_)
}

#[pyfunction]
fn remark4_3_v(k: f64, xi: f64) -> f64 {
    bounds::remark4_3_v(k, xi)
}

#[pyfunction]
fn mass_radius(n: usize, k: f64, lambda_: f64, sigma: f64) -> f64 {
    bounds::mass_radius(n, k, lambda_, sigma)
}

#[pyfunction]
#[pyo3(signature = (n, k, lambda_, r, eps1, eps2, sigma, frak_c = None))]
#[allow(clippy::too_many_arguments)]
fn condition_delta<'py>(
    py: Python<'py>,
    n: usize,
    k: f64,
    lambda_: f64,
    r: f64,
    eps1: f64,
    eps2: f64,
    sigma: f64,
    frak_c: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &bounds::condition_delta(n, k, lambda_, r, eps1, eps2, sigma, frak_c).map_err(err)?,
    )
}

#[pymodule]
fn finsler(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Metric>()?;
    m.add_function(wrap_pyfunction!(injectivity_bound, m)?)?;
    m.add_function(wrap_pyfunction!(convexity_bound, m)?)?;
    m.add_function(wrap_pyfunction!(s_k, m)?)?;
    m.add_function(wrap_pyfunction!(t_frak, m)?)?;
    m.add_function(wrap_pyfunction!(remark4_3_v, m)?)?;
    m.add_function(wrap_pyfunction!(mass_radius, m)?)?;
    m.add_function(wrap_pyfunction!(condition_delta, m)?)?;
    Ok(())
}
