//! Metric configuration files.
//!
//! A config is a JSON object
//! `{kind, dim, params, periodicity, derivative_mode, fd_step}`; unknown keys
//! are rejected at every level. Catalog presets (`sphere`, `flat_torus`, ...)
//! take only the params they need.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::metric::field::{CoefficientField, GridTable};
use crate::metric::{catalog, Chart, DerivativeMode, MetricModel, DEFAULT_FD_STEP};
use crate::numeric::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    Riemannian,
    Randers,
    BerwaldTorus,
    Custom,
    /// Unit 2-sphere in stereographic coordinates.
    Sphere,
    SpherePolar,
    FlatTorus,
    RandersNonparallel,
    PerturbedTorus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeModeConfig {
    Analytic,
    FiniteDifference,
}

/// Coefficient tables on a regular grid (custom metrics).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub shape: Vec<usize>,
    /// Row-major n×n matrices, one per node (last axis fastest).
    pub a: Vec<f64>,
    /// Optional 1-form components, one n-vector per node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricParams {
    /// berwald_torus parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    /// Constant row-major matrix a_ij.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    /// Constant 1-form b_i.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Box that samplers draw base points from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<Vec<[f64; 2]>>,
    /// Compact domain for volume integrals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub kind: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default)]
    pub params: MetricParams,
    /// Per-axis period, `null` for a non-periodic axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodicity: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_mode: Option<DerivativeModeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

fn cfg_err(msg: impl Into<String>) -> FinslerError {
    FinslerError::Config(msg.into())
}

impl MetricConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg_err(format!("metric config: {e}")))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// A preset config naming a catalog metric.
    pub fn preset(kind: MetricKind) -> Self {
        Self {
            kind,
            dim: None,
            params: MetricParams::default(),
            periodicity: None,
            derivative_mode: None,
            fd_step: None,
        }
    }

    fn require_dim(&self) -> Result<usize> {
        match self.dim {
            Some(n) if n > 0 => Ok(n),
            Some(_) => Err(cfg_err("dim must be positive")),
            None => Err(cfg_err(format!("kind {:?} requires dim", self.kind))),
        }
    }

    fn reject_chart_fields(&self) -> Result<()> {
        let p = &self.params;
        if self.periodicity.is_some()
            || p.sample_box.is_some()
            || p.domain.is_some()
            || p.safe_radius.is_some()
        {
            return Err(cfg_err(format!("kind {:?} has a fixed chart", self.kind)));
        }
        Ok(())
    }

    fn reject_params(&self, allowed: &[&str]) -> Result<()> {
        let value = serde_json::to_value(&self.params)?;
        if let Some(map) = value.as_object() {
            for key in map.keys() {
                if !allowed.contains(&key.as_str()) {
                    return Err(cfg_err(format!(
                        "parameter {key:?} does not apply to kind {:?}",
                        self.kind
                    )));
                }
            }
        }
        Ok(())
    }

    fn chart(&self, n: usize) -> Result<Chart> {
        let periods = match &self.periodicity {
            Some(p) if p.len() != n => return Err(cfg_err("periodicity length must equal dim")),
            Some(p) => p.clone(),
            None => vec![None; n],
        };
        let to_pairs = |v: &Vec<[f64; 2]>, what: &str| -> Result<Vec<(f64, f64)>> {
            if v.len() != n {
                return Err(cfg_err(format!("{what} length must equal dim")));
            }
            v.iter()
                .map(|[lo, hi]| {
                    if hi > lo {
                        Ok((*lo, *hi))
                    } else {
                        Err(cfg_err(format!("{what} intervals must be increasing")))
                    }
                })
                .collect()
        };
        let sample_box = match &self.params.sample_box {
            Some(b) => to_pairs(b, "sample_box")?,
            None => periods.iter().map(|p| (0.0, p.unwrap_or(1.0))).collect(),
        };
        let domain = match &self.params.domain {
            Some(d) => Some(to_pairs(d, "domain")?),
            None if periods.iter().all(Option::is_none) => Some(sample_box.clone()),
            None => None,
        };
        let safe = self.params.safe_radius.unwrap_or(1.0);
        if !(safe > 0.0) {
            return Err(cfg_err("safe_radius must be positive"));
        }
        Chart::new(periods, domain, sample_box, safe)
    }

    fn matrix_field(values: &[f64], n: usize) -> Result<CoefficientField> {
        if values.len() != n * n {
            return Err(cfg_err(format!("a must have {} entries", n * n)));
        }
        Ok(CoefficientField::constant_matrix(&Matrix::from_row_slice(
            n, n, values,
        )))
    }

    fn grid_fields(
        &self,
        n: usize,
        chart: &Chart,
    ) -> Result<(CoefficientField, Option<CoefficientField>)> {
        let g = self
            .params
            .grid
            .as_ref()
            .ok_or_else(|| cfg_err("custom kind requires params.grid"))?;
        let periodic: Vec<bool> = chart.periods().iter().map(Option::is_some).collect();
        if g.lower.len() != n {
            return Err(cfg_err("grid dimension must equal dim"));
        }
        let table = |values: &Vec<f64>, comps: usize| -> Result<CoefficientField> {
            Ok(CoefficientField::Grid(GridTable::new(
                g.lower.clone(),
                g.upper.clone(),
                g.shape.clone(),
                periodic.clone(),
                comps,
                values.clone(),
            )?))
        };
        let a = table(&g.a, n * n)?;
        let b = g.b.as_ref().map(|b| table(b, n)).transpose()?;
        Ok((a, b))
    }

    /// Builds the model this config describes.
    pub fn build(&self) -> Result<MetricModel> {
        let p = &self.params;
        let model = match self.kind {
            MetricKind::Euclidean => {
                let n = self.require_dim()?;
                self.reject_params(&["sample_box", "domain", "safe_radius", "name"])?;
                if self.periodicity.is_none()
                    && p.sample_box.is_none()
                    && p.domain.is_none()
                    && p.safe_radius.is_none()
                {
                    catalog::euclidean(n)?
                } else {
                    let chart = self.chart(n)?;
                    let name = p.name.clone().unwrap_or_else(|| format!("euclidean({n})"));
                    catalog::riemannian(
                        name,
                        chart,
                        CoefficientField::constant_matrix(&Matrix::identity(n, n)),
                    )?
                }
            }
            MetricKind::Riemannian | MetricKind::Randers => {
                let n = self.require_dim()?;
                let randers = self.kind == MetricKind::Randers;
                let allowed: &[&str] = if randers {
                    &["a", "b", "sample_box", "domain", "safe_radius", "name"]
                } else {
                    &["a", "sample_box", "domain", "safe_radius", "name"]
                };
                self.reject_params(allowed)?;
                let chart = self.chart(n)?;
                let a = match &p.a {
                    Some(a) => Self::matrix_field(a, n)?,
                    None => CoefficientField::constant_matrix(&Matrix::identity(n, n)),
                };
                let default_name = if randers { "randers" } else { "riemannian" };
                let name = p.name.clone().unwrap_or_else(|| default_name.into());
                if randers {
                    let b =
                        p.b.clone()
                            .ok_or_else(|| cfg_err("randers kind requires params.b"))?;
                    if b.len() != n {
                        return Err(cfg_err(format!("b must have {n} entries")));
                    }
                    // constant a and b make the Chern connection y-independent
                    catalog::randers(name, chart, a, CoefficientField::Constant(b), true)?
                } else {
                    catalog::riemannian(name, chart, a)?
                }
            }
            MetricKind::Custom => {
                let n = self.require_dim()?;
                self.reject_params(&["grid", "sample_box", "domain", "safe_radius", "name"])?;
                let chart = self.chart(n)?;
                let (a, b) = self.grid_fields(n, &chart)?;
                let name = p.name.clone().unwrap_or_else(|| "custom".into());
                match b {
                    Some(b) => catalog::randers(name, chart, a, b, false)?,
                    None => catalog::riemannian(name, chart, a)?,
                }
            }
            MetricKind::BerwaldTorus => {
                self.preset_dim(2)?;
                self.reject_chart_fields()?;
                self.reject_params(&["n"])?;
                catalog::berwald_torus(
                    p.n.ok_or_else(|| cfg_err("berwald_torus requires params.n"))?,
                )?
            }
            MetricKind::Sphere => self.simple_preset(catalog::sphere_stereographic)?,
            MetricKind::SpherePolar => self.simple_preset(catalog::sphere_polar)?,
            MetricKind::FlatTorus => self.simple_preset(catalog::flat_torus)?,
            MetricKind::RandersNonparallel => {
                self.preset_dim(2)?;
                self.reject_chart_fields()?;
                self.reject_params(&["epsilon"])?;
                catalog::randers_nonparallel(
                    p.epsilon
                        .ok_or_else(|| cfg_err("requires params.epsilon"))?,
                )?
            }
            MetricKind::PerturbedTorus => {
                self.preset_dim(2)?;
                self.reject_chart_fields()?;
                self.reject_params(&["delta", "b0"])?;
                catalog::perturbed_torus(
                    p.delta.ok_or_else(|| cfg_err("requires params.delta"))?,
                    p.b0.unwrap_or(0.0),
                )?
            }
        };
        self.apply_derivative_mode(model)
    }

    fn preset_dim(&self, n: usize) -> Result<()> {
        match self.dim {
            Some(d) if d != n => Err(cfg_err(format!("kind {:?} is {n}-dimensional", self.kind))),
            _ => Ok(()),
        }
    }

    fn simple_preset(&self, make: fn() -> Result<MetricModel>) -> Result<MetricModel> {
        self.preset_dim(2)?;
        self.reject_chart_fields()?;
        self.reject_params(&[])?;
        make()
    }

    fn apply_derivative_mode(&self, model: MetricModel) -> Result<MetricModel> {
        if let Some(step) = self.fd_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(cfg_err("fd_step must be positive"));
            }
        }
        let mode = match (self.derivative_mode, self.fd_step) {
            (None, None) => return Ok(model),
            (Some(DerivativeModeConfig::Analytic), Some(_)) => {
                return Err(cfg_err(
                    "fd_step only applies to derivative_mode finite_difference",
                ))
            }
            (Some(DerivativeModeConfig::Analytic), None) => DerivativeMode::Analytic,
            (Some(DerivativeModeConfig::FiniteDifference) | None, step) => {
                DerivativeMode::FiniteDifference {
                    step: step.unwrap_or(DEFAULT_FD_STEP),
                }
            }
        };
        model
            .with_derivative_mode(mode)
            .map_err(|e| cfg_err(format!("derivative_mode: {e}")))
    }
}

/// Parses and builds a metric config file in one step.
pub fn load_metric(path: impl AsRef<Path>) -> Result<(MetricConfig, MetricModel)> {
    let cfg = MetricConfig::from_path(path)?;
    let model = cfg.build()?;
    Ok((cfg, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn berwald_torus_config_builds() {
        let cfg =
            MetricConfig::from_json(r#"{"kind": "berwald_torus", "params": {"n": 2}}"#).unwrap();
        let m = cfg.build().unwrap();
        assert_eq!(m.name(), "berwald_torus(2)");
        assert!((m.eval_f(&[0.0, 0.0], &[-1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(MetricConfig::from_json(r#"{"kind": "sphere", "colour": 1}"#).is_err());
        assert!(MetricConfig::from_json(r#"{"kind": "sphere", "params": {"radius": 2}}"#).is_err());
        let stray = MetricConfig::from_json(r#"{"kind": "sphere", "params": {"n": 2}}"#).unwrap();
        assert!(matches!(stray.build(), Err(FinslerError::Config(_))));
    }

    #[test]
    fn randers_config_respects_norm_bound() {
        let ok = r#"{"kind": "randers", "dim": 2, "params": {"b": [0.3, 0.0]}, "periodicity": [6.283185307179586, 6.283185307179586]}"#;
        let m = MetricConfig::from_json(ok).unwrap().build().unwrap();
        assert!((m.eval_f(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - 1.3).abs() < 1e-15);
        let bad = r#"{"kind": "randers", "dim": 2, "params": {"b": [1.2, 0.0]}}"#;
        assert!(MetricConfig::from_json(bad).unwrap().build().is_err());
    }

    #[test]
    fn finite_difference_mode_matches_analytic() {
        let fd = r#"{"kind": "berwald_torus", "params": {"n": 3}, "derivative_mode": "finite_difference", "fd_step": 0.001}"#;
        let m_fd = MetricConfig::from_json(fd).unwrap().build().unwrap();
        let m = catalog::berwald_torus(3.0).unwrap();
        let (x, y) = ([0.4, 1.0], [0.3, -0.8]);
        let diff = m_fd.fundamental_tensor(&x, &y).unwrap() - m.fundamental_tensor(&x, &y).unwrap();
        assert!(diff.amax() < 1e-8, "{diff}");
    }

    #[test]
    fn custom_grid_reproduces_constant_metric() {
        let shape = [5usize, 5];
        let nodes = shape[0] * shape[1];
        let a: Vec<f64> = (0..nodes).flat_map(|_| [2.0, 0.0, 0.0, 2.0]).collect();
        let cfg = MetricConfig {
            kind: MetricKind::Custom,
            dim: Some(2),
            params: MetricParams {
                grid: Some(GridConfig {
                    lower: vec![0.0, 0.0],
                    upper: vec![1.0, 1.0],
                    shape: shape.to_vec(),
                    a,
                    b: None,
                }),
                ..MetricParams::default()
            },
            periodicity: None,
            derivative_mode: None,
            fd_step: None,
        };
        let m = cfg.build().unwrap();
        let f = m.eval_f(&[0.37, 0.61], &[3.0, 4.0]).unwrap();
        assert!((f - 5.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}
