//! Run configuration merging and command execution.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use finsler_core::bounds;
use finsler_core::centermass::{
    center_of_mass, mass_field_jacobian, smallest_singular_value, MassDistribution,
};
use finsler_core::config::MetricConfig;
use finsler_core::invariants::{invariant_report, InvariantSettings};
use finsler_core::metric::measure::VolumeMeasure;
use finsler_core::report::{to_csv_string, to_json_string};
use finsler_core::verify::{run_suite, CheckSettings, SuiteConfig, SuiteName};
use finsler_core::{FinslerError, MetricModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A metric given by file path or inline.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricRef {
    Path(PathBuf),
    Inline(Box<MetricConfig>),
}

/// Everything a run can be configured with. Unset fields fall back to
/// command defaults; the resolved copy is embedded in every report.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_range: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_used: Option<f64>,
    #[serde(rename = "Lambda_used", skip_serializing_if = "Option::is_none")]
    pub lambda_used: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangle_scales: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobian_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

macro_rules! prefer {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    /// Fields set in `other` replace ours.
    fn overridden_by(mut self, other: RunConfig) -> RunConfig {
        prefer!(self, other; command, metric, samples, seed, tolerance, output, format, grid_resolution,
            class_range, volume_order, name, suite, k_used, lambda_used, t_max, t_steps, checks,
            distance_radius, triangle_scales, x_samples, points, start, tol, max_iter, jacobian_step,
            measure, order);
        self.params.extend(other.params);
        self
    }

    /// Makes relative paths from a config file relative to its directory.
    fn rebase(&mut self, dir: &Path) {
        if let Some(MetricRef::Path(p)) = &mut self.metric {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        if let Some(p) = &mut self.points {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}

pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: msg.into(),
    }
}

impl From<FinslerError> for CliError {
    fn from(e: FinslerError) -> Self {
        use FinslerError::*;
        let code = match e {
            Config(_)
            | Io(_)
            | Json(_)
            | Csv(_)
            | InvalidParameter(_)
            | InvalidMetric(_)
            | DimensionMismatch { .. }
            | UnsupportedModel(_)
            | UnsupportedDimension(_)
            | NonCompactChart => 2,
            _ => 3,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load_run_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let mut cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    cfg.rebase(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

/// Resolves the metric reference into its parsed config and model.
fn resolve_metric(cfg: &RunConfig) -> CliResult<(MetricConfig, MetricModel)> {
    let metric = cfg
        .metric
        .as_ref()
        .ok_or_else(|| config_error("--metric is required"))?;
    let mc = match metric {
        MetricRef::Path(p) => MetricConfig::from_path(p)?,
        MetricRef::Inline(m) => m.as_ref().clone(),
    };
    let model = mc.build()?;
    Ok((mc, model))
}

fn param(cfg: &RunConfig, key: &str) -> CliResult<f64> {
    cfg.params
        .get(key)
        .copied()
        .ok_or_else(|| config_error(format!("missing parameter --{}", key.replace('_', "-"))))
}

fn dim_param(cfg: &RunConfig) -> CliResult<usize> {
    let n = param(cfg, "n")?;
    if n.fract() != 0.0 || n < 1.0 {
        return Err(config_error("--n must be a positive integer"));
    }
    Ok(n as usize)
}

struct Outcome {
    result: Value,
    metric: Option<MetricConfig>,
    exit: u8,
}

fn invariants(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let (mc, model) = resolve_metric(cfg)?;
    let d = InvariantSettings::default();
    let settings = InvariantSettings {
        samples: *cfg.samples.get_or_insert(d.samples),
        seed: *cfg.seed.get_or_insert(d.seed),
        grid_resolution: *cfg.grid_resolution.get_or_insert(d.grid_resolution),
        class_range: *cfg.class_range.get_or_insert(d.class_range),
        volume_order: *cfg.volume_order.get_or_insert(d.volume_order),
    };
    let report = invariant_report(&model, &settings)?;
    Ok(Outcome {
        result: serde_json::to_value(report).map_err(FinslerError::from)?,
        metric: Some(mc),
        exit: 0,
    })
}

fn bounds_cmd(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let name = cfg
        .name
        .clone()
        .ok_or_else(|| config_error("bound name is required"))?;
    let p = |k: &str| param(cfg, k);
    let value: Value = match name.as_str() {
        "thm1.1" | "thm1_1" => serde_json::to_value(bounds::thm1_1_injectivity_bound(
            dim_param(cfg)?,
            p("k")?,
            p("tau")?,
            p("Lambda")?,
            p("D")?,
            p("V")?,
        )?),
        "thm3.6" | "thm3_6" => serde_json::to_value(bounds::thm3_6_length_bound(
            dim_param(cfg)?,
            p("k")?,
            p("tau")?,
            p("Lambda")?,
            p("D")?,
            p("V")?,
        )?),
        "thm4.2" | "thm4_2" => serde_json::to_value(bounds::thm4_2_convexity_bound(
            p("k")?,
            p("sigma")?,
            p("Lambda")?,
        )?),
        "mass_radius" => serde_json::to_value(bounds::mass_radius_report(
            dim_param(cfg)?,
            p("k")?,
            p("Lambda")?,
            p("sigma")?,
        )?),
        "remark4.3" | "remark4_3_v" => Ok(scalar(
            "remark4_3_v",
            &[("k", p("k")?), ("xi", p("xi")?)],
            |v| bounds::remark4_3_v(v[0], v[1]),
        )),
        "t_frak" => Ok(scalar(
            "t_frak",
            &[("k", p("k")?), ("Lambda", p("Lambda")?)],
            |v| bounds::t_frak(v[0], v[1]),
        )),
        "c0" => Ok(scalar(
            "C0",
            &[("k", p("k")?), ("Lambda", p("Lambda")?)],
            |v| bounds::c0(v[0], v[1]),
        )),
        "c1" => {
            let n = dim_param(cfg)?;
            Ok(scalar(
                "C1",
                &[("n", n as f64), ("k", p("k")?), ("Lambda", p("Lambda")?)],
                |v| bounds::c1(n, v[1], v[2]),
            ))
        }
        "c2" => Ok(scalar(
            "C2",
            &[("k", p("k")?), ("Lambda", p("Lambda")?)],
            |v| bounds::c2(v[0], v[1]),
        )),
        "c3" => {
            let n = dim_param(cfg)?;
            let (k, lam) = (p("k")?, p("Lambda")?);
            let frak_c = cfg
                .params
                .get("frak_c")
                .copied()
                .unwrap_or_else(|| bounds::holonomy_constant_default(n, k, lam));
            Ok(scalar(
                "C3",
                &[
                    ("n", n as f64),
                    ("k", k),
                    ("Lambda", lam),
                    ("R", p("R")?),
                    ("eps2", p("eps2")?),
                    ("frak_c", frak_c),
                ],
                |v| bounds::c3(v[1], v[2], v[3], v[4], v[5]),
            ))
        }
        "packing" => {
            let n = dim_param(cfg)?;
            let (k, lam, rb, rs) = (p("k")?, p("Lambda")?, p("R_big")?, p("R_small")?);
            let count = bounds::packing_count(n, k, lam, rb, rs)?;
            Ok(scalar(
                "packing_count",
                &[
                    ("n", n as f64),
                    ("k", k),
                    ("Lambda", lam),
                    ("R_big", rb),
                    ("R_small", rs),
                ],
                |_| count,
            ))
        }
        other => return Err(config_error(format!("unknown bound {other:?}"))),
    }
    .map_err(FinslerError::from)?;
    Ok(Outcome {
        result: value,
        metric: None,
        exit: 0,
    })
}

fn scalar(name: &str, inputs: &[(&str, f64)], f: impl Fn(&[f64]) -> f64) -> Value {
    let vals: Vec<f64> = inputs.iter().map(|(_, v)| *v).collect();
    let inputs: BTreeMap<&str, finsler_core::report::Extended> = inputs
        .iter()
        .map(|(k, v)| (*k, finsler_core::report::Extended(*v)))
        .collect();
    json!({
        "name": name,
        "inputs": inputs,
        "value": finsler_core::report::Extended(f(&vals)),
    })
}

fn constants(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let p = |k: &str| param(cfg, k);
    let report = bounds::condition_delta(
        dim_param(cfg)?,
        p("k")?,
        p("Lambda")?,
        p("R")?,
        p("eps1")?,
        p("eps2")?,
        p("sigma")?,
        cfg.params.get("frak_c").copied(),
    )?;
    Ok(Outcome {
        result: serde_json::to_value(report).map_err(FinslerError::from)?,
        metric: None,
        exit: 0,
    })
}

fn verify(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let (mc, model) = resolve_metric(cfg)?;
    let suite: SuiteName = cfg.suite.get_or_insert_with(|| "all".into()).parse()?;
    let d = SuiteConfig::default();
    let ds = CheckSettings::default();
    let settings = CheckSettings {
        samples: *cfg.samples.get_or_insert(ds.samples),
        seed: *cfg.seed.get_or_insert(ds.seed),
        tolerance: cfg.tolerance,
        t_max: *cfg.t_max.get_or_insert(ds.t_max),
        t_steps: *cfg.t_steps.get_or_insert(ds.t_steps),
    };
    let suite_cfg = SuiteConfig {
        suite,
        k_used: cfg.k_used,
        lambda_used: cfg.lambda_used,
        settings,
        distance_radius: *cfg.distance_radius.get_or_insert(d.distance_radius),
        triangle_scales: cfg.triangle_scales.get_or_insert(d.triangle_scales).clone(),
        x_samples: *cfg.x_samples.get_or_insert(d.x_samples),
        checks: cfg.checks.clone(),
    };
    let report = run_suite(&model, &suite_cfg)?;
    let exit = if report.total_violations > 0 { 1 } else { 0 };
    Ok(Outcome {
        result: serde_json::to_value(report).map_err(FinslerError::from)?,
        metric: Some(mc),
        exit,
    })
}

fn karcher(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let (mc, model) = resolve_metric(cfg)?;
    let path = cfg
        .points
        .clone()
        .ok_or_else(|| config_error("--points is required"))?;
    let file = File::open(&path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let dist = MassDistribution::from_csv(file, model.dim())?;
    if dist.is_empty() {
        return Err(config_error("the points file is empty"));
    }
    let start = cfg
        .start
        .get_or_insert_with(|| dist.points()[0].clone())
        .clone();
    if start.len() != model.dim() {
        return Err(config_error(format!(
            "--start needs {} coordinates",
            model.dim()
        )));
    }
    let tol = *cfg.tol.get_or_insert(1e-10);
    let max_iter = *cfg.max_iter.get_or_insert(200);
    let step = *cfg.jacobian_step.get_or_insert(1e-4);
    let center = center_of_mass(&model, &dist, &start, tol, max_iter)?;
    let jac = mass_field_jacobian(&model, &dist, &center.point, step)?;
    let rows: Vec<Vec<f64>> = jac
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    let result = json!({
        "center": center,
        "jacobian": rows,
        "jacobian_min_singular_value": smallest_singular_value(&jac),
        "points": dist.len(),
    });
    Ok(Outcome {
        result,
        metric: Some(mc),
        exit: 0,
    })
}

fn volume(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let (mc, model) = resolve_metric(cfg)?;
    let measure = match cfg
        .measure
        .get_or_insert_with(|| "ht".into())
        .to_ascii_lowercase()
        .as_str()
    {
        "bh" => VolumeMeasure::Bh,
        "ht" => VolumeMeasure::Ht,
        other => {
            return Err(config_error(format!(
                "unknown measure {other:?} (bh or ht)"
            )))
        }
    };
    let order = *cfg.order.get_or_insert(64);
    let value = model.volume(measure, order)?;
    Ok(Outcome {
        result: json!({"measure": cfg.measure, "order": order, "value": value}),
        metric: Some(mc),
        exit: 0,
    })
}

/// Runs one command; returns the process exit code on success.
pub fn execute(config_path: Option<&Path>, flags: RunConfig) -> CliResult<u8> {
    let base = match config_path {
        Some(p) => load_run_config(p)?,
        None => RunConfig::default(),
    };
    if let (Some(a), Some(b)) = (&base.command, &flags.command) {
        if a != b {
            return Err(config_error(format!(
                "config file is for command {a:?}, not {b:?}"
            )));
        }
    }
    let mut cfg = base.overridden_by(flags);
    let format = *cfg.format.get_or_insert(Format::Json);
    let outcome = match cfg.command.as_deref() {
        Some("invariants") => invariants(&mut cfg)?,
        Some("bounds") => bounds_cmd(&mut cfg)?,
        Some("constants") => constants(&mut cfg)?,
        Some("verify") => verify(&mut cfg)?,
        Some("karcher") => karcher(&mut cfg)?,
        Some("volume") => volume(&mut cfg)?,
        other => return Err(config_error(format!("unknown command {other:?}"))),
    };
    let mut doc = serde_json::Map::new();
    doc.insert(
        "config".into(),
        serde_json::to_value(&cfg).map_err(FinslerError::from)?,
    );
    if let Some(m) = &outcome.metric {
        doc.insert(
            "metric_config".into(),
            serde_json::to_value(m).map_err(FinslerError::from)?,
        );
    }
    doc.insert("result".into(), outcome.result);
    let doc = Value::Object(doc);
    let text = match format {
        Format::Json => to_json_string(&doc)?,
        Format::Csv => to_csv_string(&doc)?,
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(outcome.exit)
}
