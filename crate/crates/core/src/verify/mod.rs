//! Numerical checks of comparison inequalities on sampled geodesic
//! configurations. Each check returns a [`VerifyReport`] with the worst
//! margin found; a sample violates the inequality when its margin is below
//! −tolerance.

mod berwald_checks;
mod jacobi_checks;

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::s_k;
use crate::error::{FinslerError, Result};
use crate::invariants::{curvature_bounds, uniformity};
use crate::metric::MetricModel;
use crate::numeric::{random_unit, Vector};
use crate::report::Extended;

pub use berwald_checks::{
    check_holonomy_quadratic, check_norm_derivative, check_polarized_curvature,
    check_s_curvature_constancy, holonomy_defect, HolonomySample,
};
pub use jacobi_checks::{
    check_curvature_operator_norm, check_distance_comparison, check_eta_bound,
    check_jacobi_derivative, check_rauch, check_transport_vs_exp,
};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub check_name: String,
    pub model: String,
    pub samples: usize,
    pub violations: usize,
    /// Smallest margin over all samples; negative means the inequality failed.
    pub worst_margin: Extended,
    pub tolerance: f64,
    /// False when the model is outside the check's hypothesis; such reports
    /// never count violations.
    pub applicable: bool,
    pub config: BTreeMap<String, Value>,
    pub extras: BTreeMap<String, Extended>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Sampling controls shared by all checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSettings {
    pub samples: usize,
    pub seed: u64,
    /// Overrides the check's default tolerance.
    pub tolerance: Option<f64>,
    /// Longest geodesic parameter used; checks cap it further where their
    /// inequality requires.
    pub t_max: f64,
    /// RK4 steps per geodesic.
    pub t_steps: usize,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            samples: 50,
            seed: 0,
            tolerance: None,
            t_max: 2.0,
            t_steps: 200,
        }
    }
}

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

impl CheckSettings {
    pub fn with_samples(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }

    fn tol(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOLERANCE)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        crate::numeric::seeded_rng(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(FinslerError::InvalidParameter(
                "samples must be positive".into(),
            ));
        }
        if !(self.t_max > 0.0) || self.t_steps < 8 {
            return Err(FinslerError::InvalidParameter(
                "t_max must be positive and t_steps at least 8".into(),
            ));
        }
        Ok(())
    }

    fn describe(&self) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        m.insert("seed".into(), json!(self.seed));
        m.insert("t_steps".into(), json!(self.t_steps));
        m
    }
}

/// Running minimum of margins with a violation count.
struct Tally {
    samples: usize,
    violations: usize,
    worst: f64,
    tol: f64,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Self {
            samples: 0,
            violations: 0,
            worst: f64::INFINITY,
            tol,
        }
    }

    fn record(&mut self, margin: f64) {
        self.samples += 1;
        // NaN margins count as violations
        if !(margin >= -self.tol) {
            self.violations += 1;
        }
        self.worst = if margin.is_nan() {
            f64::NAN
        } else {
            self.worst.min(margin)
        };
    }

    fn report(
        self,
        check: &str,
        model: &MetricModel,
        applicable: bool,
        config: BTreeMap<String, Value>,
        extras: BTreeMap<String, f64>,
    ) -> VerifyReport {
        VerifyReport {
            check_name: check.into(),
            model: model.name().into(),
            samples: self.samples,
            violations: if applicable { self.violations } else { 0 },
            worst_margin: Extended(self.worst),
            tolerance: self.tol,
            applicable,
            config,
            extras: extras.into_iter().map(|(k, v)| (k, Extended(v))).collect(),
        }
    }
}

/// √(vᵀ g(x, reference) v).
fn norm_at(model: &MetricModel, x: &[f64], reference: &[f64], v: &[f64]) -> f64 {
    let g = model.g(x, reference);
    let v = Vector::from_column_slice(v);
    v.dot(&(g * &v)).max(0.0).sqrt()
}

/// A base point from the sample box and a direction on the indicatrix.
fn sample_unit_frame(model: &MetricModel, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vector) {
    let x = model.chart().sample_point(rng);
    let u = random_unit(rng, model.dim());
    let f = model.fv(&x, &u);
    (x, u / f)
}

/// Component of `v` that is g_y-orthogonal to y (y on the indicatrix).
fn orthogonal_part(model: &MetricModel, x: &[f64], y: &Vector, v: &Vector) -> Vector {
    let g = model.gv(x, y);
    let alpha = y.dot(&(&g * v)) / y.dot(&(&g * y));
    v - y * alpha
}

/// A g_y-orthonormal basis of y^⊥.
fn orthonormal_complement(model: &MetricModel, x: &[f64], y: &Vector) -> Vec<Vector> {
    let n = model.dim();
    let g = model.gv(x, y);
    let inner = |a: &Vector, b: &Vector| a.dot(&(&g * b));
    let mut basis: Vec<Vector> = vec![y / inner(y, y).sqrt()];
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        for b in &basis {
            e -= b * inner(b, &e);
        }
        let len = inner(&e, &e).sqrt();
        if len > 1e-8 && basis.len() < n {
            basis.push(e / len);
        }
    }
    basis.remove(0);
    basis
}

fn half_pi_over_sqrt(k: f64) -> f64 {
    if k > 0.0 {
        0.5 * std::f64::consts::PI / k.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Relative comparison-band ratios s_k(t)/t and s_{−k}(t)/t.
fn band(k: f64, t: f64) -> (f64, f64) {
    (s_k(k, t) / t, s_k(-k, t) / t)
}

fn require_k_lambda(k_used: f64, lambda_used: Option<f64>) -> Result<()> {
    if !(k_used >= 0.0 && k_used.is_finite()) {
        return Err(FinslerError::InvalidParameter(
            "k_used must be a nonnegative number".into(),
        ));
    }
    if let Some(l) = lambda_used {
        if !(l >= 1.0 && l.is_finite()) {
            return Err(FinslerError::InvalidParameter(
                "Lambda_used must be at least 1".into(),
            ));
        }
    }
    Ok(())
}

/// True when the Chern connection is (numerically) independent of y.
pub fn is_berwald(model: &MetricModel, seed: u64) -> Result<bool> {
    if model.is_riemannian() || model.is_locally_minkowski() {
        return Ok(true);
    }
    Ok(model.berwald_sweep(20, seed)?.numerically_berwald)
}

/// Which group of checks a suite runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuiteName {
    #[serde(rename = "appendixA")]
    AppendixA,
    #[serde(rename = "appendixB")]
    AppendixB,
    #[serde(rename = "all")]
    All,
}

impl std::str::FromStr for SuiteName {
    type Err = FinslerError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "appendixA" | "A" | "a" => Ok(Self::AppendixA),
            "appendixB" | "B" | "b" => Ok(Self::AppendixB),
            "all" => Ok(Self::All),
            other => Err(FinslerError::Config(format!("unknown suite {other:?}"))),
        }
    }
}

/// Suite configuration: which checks, which constants, how many samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub suite: SuiteName,
    /// Curvature bound |K| ≤ k; measured when absent.
    pub k_used: Option<f64>,
    /// Uniformity bound Λ; measured when absent.
    #[serde(rename = "Lambda_used")]
    pub lambda_used: Option<f64>,
    pub settings: CheckSettings,
    /// Ball radius for the distance comparison.
    pub distance_radius: f64,
    pub triangle_scales: Vec<f64>,
    pub x_samples: usize,
    /// Restricts the suite to these check names when present.
    pub checks: Option<Vec<String>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: SuiteName::All,
            k_used: None,
            lambda_used: None,
            settings: CheckSettings::default(),
            distance_radius: 0.3,
            triangle_scales: vec![0.2, 0.1, 0.05],
            x_samples: 4,
            checks: None,
        }
    }
}

pub const APPENDIX_A_CHECKS: [&str; 6] = [
    "rauch",
    "distance_comparison",
    "curvature_operator_norm",
    "eta_bound",
    "transport_vs_exp",
    "jacobi_derivative",
];

pub const APPENDIX_B_CHECKS: [&str; 4] = [
    "polarized_curvature",
    "norm_derivative",
    "holonomy_quadratic",
    "s_curvature_constancy",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub model: String,
    pub k_used: f64,
    #[serde(rename = "Lambda_used")]
    pub lambda_used: f64,
    /// "given" or "measured" for each constant.
    pub constants_source: BTreeMap<String, String>,
    pub reports: Vec<VerifyReport>,
    pub total_violations: usize,
}

/// Measured |K| and Λ bounds, inflated slightly so that sampling error
/// does not tighten the inequalities being checked.
pub fn measured_constants(model: &MetricModel, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let [lo, hi] = curvature_bounds(model, samples.max(10), seed)?;
    let k = lo.abs().max(hi.abs());
    let lam = uniformity(model, samples.max(10), seed)?;
    Ok((k * (1.0 + 1e-6) + 1e-9, lam * (1.0 + 1e-9)))
}

/// Runs every check of the configured suite on one model.
pub fn run_suite(model: &MetricModel, cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.settings.validate()?;
    let mut source = BTreeMap::new();
    let needs_measure = cfg.k_used.is_none() || cfg.lambda_used.is_none();
    let measured = if needs_measure {
        Some(measured_constants(
            model,
            cfg.settings.samples.max(50),
            cfg.settings.seed,
        )?)
    } else {
        None
    };
    let k = match cfg.k_used {
        Some(k) => {
            source.insert("k_used".into(), "given".into());
            k
        }
        None => {
            source.insert("k_used".into(), "measured".into());
            measured.expect("measured when absent").0
        }
    };
    let lam = match cfg.lambda_used {
        Some(l) => {
            source.insert("Lambda_used".into(), "given".into());
            l
        }
        None => {
            source.insert("Lambda_used".into(), "measured".into());
            measured.expect("measured when absent").1
        }
    };
    let names: Vec<&str> = match cfg.suite {
        SuiteName::AppendixA => APPENDIX_A_CHECKS.to_vec(),
        SuiteName::AppendixB => APPENDIX_B_CHECKS.to_vec(),
        SuiteName::All => APPENDIX_A_CHECKS
            .iter()
            .chain(&APPENDIX_B_CHECKS)
            .copied()
            .collect(),
    };
    if let Some(only) = &cfg.checks {
        for c in only {
            if !APPENDIX_A_CHECKS.contains(&c.as_str()) && !APPENDIX_B_CHECKS.contains(&c.as_str())
            {
                return Err(FinslerError::Config(format!("unknown check {c:?}")));
            }
        }
    }
    let s = &cfg.settings;
    let mut reports = Vec::new();
    for name in names {
        if cfg
            .checks
            .as_ref()
            .is_some_and(|only| !only.iter().any(|c| c == name))
        {
            continue;
        }
        let r = match name {
            "rauch" => check_rauch(model, k, s)?,
            "distance_comparison" => {
                check_distance_comparison(model, k, lam, cfg.distance_radius, s)?
            }
            "curvature_operator_norm" => check_curvature_operator_norm(model, k, s)?,
            "eta_bound" => check_eta_bound(model, k, s)?,
            "transport_vs_exp" => check_transport_vs_exp(model, k, s)?,
            "jacobi_derivative" => check_jacobi_derivative(model, lam, k, s)?,
            "polarized_curvature" => check_polarized_curvature(model, k, lam, s)?,
            "norm_derivative" => check_norm_derivative(model, s)?,
            "holonomy_quadratic" => {
                check_holonomy_quadratic(model, &cfg.triangle_scales, cfg.x_samples, k, lam, s)?
            }
            "s_curvature_constancy" => check_s_curvature_constancy(model, s)?,
            _ => unreachable!("names come from the fixed check lists"),
        };
        reports.push(r);
    }
    let total = reports.iter().map(|r| r.violations).sum();
    Ok(SuiteReport {
        suite: cfg.suite,
        model: model.name().into(),
        k_used: k,
        lambda_used: lam,
        constants_source: source,
        reports,
        total_violations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn quick(samples: usize) -> CheckSettings {
        CheckSettings {
            t_steps: 64,
            ..CheckSettings::with_samples(samples, 3)
        }
    }

    #[test]
    fn sphere_passes_appendix_a_with_unit_constants() {
        let m = catalog::sphere_stereographic().unwrap();
        let cfg = SuiteConfig {
            suite: SuiteName::AppendixA,
            k_used: Some(1.0),
            lambda_used: Some(1.0),
            settings: quick(4),
            ..SuiteConfig::default()
        };
        let rep = run_suite(&m, &cfg).unwrap();
        for r in &rep.reports {
            assert!(r.passed(), "{} failed: {:?}", r.check_name, r);
        }
        let rauch = &rep.reports[0];
        assert!(rauch.extras["perpendicular_edge_gap"].value() < 1e-4);
    }

    #[test]
    fn flat_torus_passes_everything_with_tiny_curvature() {
        let m = catalog::berwald_torus(5.0).unwrap();
        let cfg = SuiteConfig {
            k_used: Some(1e-6),
            lambda_used: Some(uniformity(&m, 50, 0).unwrap() * (1.0 + 1e-9)),
            settings: quick(3),
            ..SuiteConfig::default()
        };
        let rep = run_suite(&m, &cfg).unwrap();
        assert_eq!(rep.total_violations, 0, "{rep:#?}");
        assert!(rep.reports.iter().all(|r| r.applicable));
    }

    #[test]
    fn sphere_holonomy_is_quadratic() {
        let m = catalog::sphere_stereographic().unwrap();
        let r = check_holonomy_quadratic(&m, &[0.2, 0.1, 0.05], 3, 1.0, 1.0, &quick(1)).unwrap();
        let slope = r.extras["slope"].value();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
        assert!(r.passed());
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let m = catalog::sphere_stereographic().unwrap();
        let err =
            holonomy_defect(&m, &[0.0, 0.0], &[0.1, 0.0], &[0.2, 0.0], &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, FinslerError::DegenerateTriangle));
    }

    #[test]
    fn holonomy_scale_gate_is_enforced() {
        let m = catalog::sphere_stereographic().unwrap();
        assert!(check_holonomy_quadratic(&m, &[0.5, 0.1], 1, 1.0, 1.0, &quick(1)).is_err());
    }

    #[test]
    fn nonberwald_randers_is_reported_without_verdict() {
        let m = catalog::randers_nonparallel(0.2).unwrap();
        let r = check_s_curvature_constancy(&m, &quick(2)).unwrap();
        assert!(!r.applicable);
        assert_eq!(r.violations, 0);
    }
}
