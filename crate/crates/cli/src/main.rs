//! `finsler`: batch front end for finsler-core.
//!
//! Every command writes one JSON (or CSV) document that embeds the fully
//! resolved run configuration next to the result. Exit codes: 0 success,
//! 1 violations found, 2 configuration error, 3 numerical failure.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use run::{Format, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "finsler",
    version,
    about = "Numerical Finsler geometry toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Run configuration file (JSON); command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sampled invariants (reversibility, uniformity, curvature, diameter, volumes).
    Invariants {
        #[arg(long)]
        metric: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_resolution: Option<usize>,
        #[arg(long)]
        class_range: Option<i64>,
        #[arg(long)]
        volume_order: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form bound evaluation.
    Bounds {
        /// One of thm1.1, thm3.6, thm4.2, remark4.3, t_frak, mass_radius,
        /// packing, c0, c1, c2, c3.
        name: String,
        #[command(flatten)]
        params: BoundParams,
        #[command(flatten)]
        common: Common,
    },
    /// Comparison-inequality suites.
    Verify {
        /// appendixA, appendixB or all.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        metric: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long = "k-used")]
        k_used: Option<f64>,
        #[arg(long = "Lambda-used")]
        lambda_used: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        t_steps: Option<usize>,
        /// Comma-separated subset of checks.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        #[arg(long)]
        distance_radius: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        triangle_scales: Option<Vec<f64>>,
        #[arg(long)]
        x_samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Center of mass of a weighted point set.
    Karcher {
        #[arg(long)]
        metric: Option<PathBuf>,
        /// CSV rows `x1,...,xn[,weight]`.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Starting point, comma separated (default: first point).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        jacobian_step: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Total Busemann–Hausdorff or Holmes–Thompson volume.
    Volume {
        #[arg(long)]
        metric: Option<PathBuf>,
        /// bh or ht.
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Admissibility constants C0..C3 and the (R, eps1, eps2) test.
    Constants {
        #[command(flatten)]
        params: BoundParams,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct BoundParams {
    #[arg(long)]
    n: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "Lambda")]
    lambda: Option<f64>,
    #[arg(long = "D")]
    d: Option<f64>,
    #[arg(long = "V")]
    v: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
    #[arg(long = "frak-c")]
    frak_c: Option<f64>,
    #[arg(long = "R-big")]
    r_big: Option<f64>,
    #[arg(long = "R-small")]
    r_small: Option<f64>,
}

impl BoundParams {
    fn entries(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("n", self.n),
            ("k", self.k),
            ("tau", self.tau),
            ("Lambda", self.lambda),
            ("D", self.d),
            ("V", self.v),
            ("sigma", self.sigma),
            ("xi", self.xi),
            ("R", self.r),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("frak_c", self.frak_c),
            ("R_big", self.r_big),
            ("R_small", self.r_small),
        ]
    }
}

fn overlay(cli: Command) -> (Common, RunConfig) {
    let mut o = RunConfig::default();
    let common = match cli {
        Command::Invariants {
            metric,
            samples,
            seed,
            grid_resolution,
            class_range,
            volume_order,
            common,
        } => {
            o.command = Some("invariants".into());
            o.metric = metric.map(run::MetricRef::Path);
            (o.samples, o.seed) = (samples, seed);
            (o.grid_resolution, o.class_range, o.volume_order) =
                (grid_resolution, class_range, volume_order);
            common
        }
        Command::Bounds {
            name,
            params,
            common,
        } => {
            o.command = Some("bounds".into());
            o.name = Some(name);
            o.params = params
                .entries()
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
                .collect();
            common
        }
        Command::Constants { params, common } => {
            o.command = Some("constants".into());
            o.params = params
                .entries()
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
                .collect();
            common
        }
        Command::Verify {
            suite,
            metric,
            samples,
            seed,
            tolerance,
            k_used,
            lambda_used,
            t_max,
            t_steps,
            checks,
            distance_radius,
            triangle_scales,
            x_samples,
            common,
        } => {
            o.command = Some("verify".into());
            o.suite = suite;
            o.metric = metric.map(run::MetricRef::Path);
            (o.samples, o.seed, o.tolerance) = (samples, seed, tolerance);
            (o.k_used, o.lambda_used) = (k_used, lambda_used);
            (o.t_max, o.t_steps, o.checks) = (t_max, t_steps, checks);
            (o.distance_radius, o.triangle_scales, o.x_samples) =
                (distance_radius, triangle_scales, x_samples);
            common
        }
        Command::Karcher {
            metric,
            points,
            start,
            tol,
            max_iter,
            jacobian_step,
            common,
        } => {
            o.command = Some("karcher".into());
            o.metric = metric.map(run::MetricRef::Path);
            (o.points, o.start, o.tol) = (points, start, tol);
            (o.max_iter, o.jacobian_step) = (max_iter, jacobian_step);
            common
        }
        Command::Volume {
            metric,
            measure,
            order,
            common,
        } => {
            o.command = Some("volume".into());
            o.metric = metric.map(run::MetricRef::Path);
            (o.measure, o.order) = (measure, order);
            common
        }
    };
    o.output = common.output.clone();
    o.format = common.format;
    (common, o)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, flags) = overlay(cli.command);
    match run::execute(common.config.as_deref(), flags) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
