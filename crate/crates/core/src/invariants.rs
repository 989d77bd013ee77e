//! Sampled estimates of the global constants that enter the bounds:
//! reversibility, uniformity, curvature ranges, diameter, shortest closed
//! geodesics on flat tori, and the injectivity diagnostics assembled from
//! them.
//!
//! Suprema are estimated from seeded random samples followed by Nelder–Mead
//! refinement of the best few, so every estimate is a lower bound of the
//! true supremum (and an upper bound for infima).

use std::f64::consts::PI;

use petgraph::graph::{DiGraph, NodeIndex};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{thm1_1_injectivity_bound, BoundReport};
use crate::error::{FinslerError, Result};
use crate::metric::measure::VolumeMeasure;
use crate::metric::MetricModel;
use crate::numeric::{nelder_mead, random_unit, seeded_rng, Vector};
use crate::report::Extended;

/// Number of best samples that get a local refinement.
pub const REFINE_STARTS: usize = 5;
const REFINE_EVALS: usize = 400;

/// Outcome of one sampled supremum search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    /// Parameters of the best configuration found.
    pub argmax: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub refine_starts: usize,
    pub evaluations: usize,
}

/// Maximizes `objective` (NaN marks an invalid configuration) over samples
/// drawn by `draw`, then refines the best few with Nelder–Mead. `starts`
/// are extra configurations evaluated alongside the samples.
fn sup_search(
    samples: usize,
    seed: u64,
    starts: &[Vec<f64>],
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Vec<f64>,
    objective: impl Fn(&[f64]) -> f64,
) -> Result<SupEstimate> {
    if samples < 10 {
        return Err(FinslerError::InvalidParameter(
            "at least 10 samples are required".into(),
        ));
    }
    let mut rng = seeded_rng(seed);
    let mut pool: Vec<(f64, Vec<f64>)> = Vec::with_capacity(samples + starts.len());
    for p in starts
        .iter()
        .cloned()
        .chain((0..samples).map(|_| draw(&mut rng)))
    {
        let v = objective(&p);
        if v.is_finite() {
            pool.push((v, p));
        }
    }
    let mut evaluations = samples + starts.len();
    if pool.is_empty() {
        return Err(FinslerError::IntegrationFailure(
            "no valid sample configuration".into(),
        ));
    }
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut best, mut arg) = (pool[0].0, pool[0].1.clone());
    let refine = pool.len().min(REFINE_STARTS);
    for (_, start) in pool.iter().take(refine) {
        let mut neg = |p: &[f64]| {
            let v = objective(p);
            if v.is_finite() {
                -v
            } else {
                f64::INFINITY
            }
        };
        let r = nelder_mead(&mut neg, start, 0.05, REFINE_EVALS, 1e-14);
        evaluations += r.evaluations;
        if -r.value > best {
            best = -r.value;
            arg = r.point;
        }
    }
    Ok(SupEstimate {
        value: best,
        argmax: arg,
        samples,
        seed,
        refine_starts: refine,
        evaluations,
    })
}

/// Splits a parameter vector into a base point and `count` tangent vectors.
fn unpack(model: &MetricModel, p: &[f64], count: usize) -> (Vec<f64>, Vec<Vector>) {
    let n = model.dim();
    let mut x = p[..n].to_vec();
    model.chart().clamp_to_sample_box(&mut x);
    let vs = (0..count)
        .map(|i| Vector::from_column_slice(&p[n * (i + 1)..n * (i + 2)]))
        .collect();
    (x, vs)
}

fn draw_config(model: &MetricModel, rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let n = model.dim();
    let mut p = model.chart().sample_point(rng);
    for _ in 0..count {
        p.extend(random_unit(rng, n).iter());
    }
    p
}

fn nonzero(v: &Vector) -> bool {
    v.iter().any(|c| *c != 0.0)
}

/// sup F(−X)/F(X) search; the argmax is (x, X).
pub fn reversibility_search(model: &MetricModel, samples: usize, seed: u64) -> Result<SupEstimate> {
    let mut est = sup_search(
        samples,
        seed,
        &[],
        |rng| draw_config(model, rng, 1),
        |p| {
            let (x, v) = unpack(model, p, 1);
            if !nonzero(&v[0]) {
                return f64::NAN;
            }
            model.fv(&x, &(-&v[0])) / model.fv(&x, &v[0])
        },
    )?;
    est.value = est.value.max(1.0);
    Ok(est)
}

/// Estimate of the reversibility λ_F = sup F(−X)/F(X).
pub fn reversibility(model: &MetricModel, samples: usize, seed: u64) -> Result<f64> {
    Ok(reversibility_search(model, samples, seed)?.value)
}

/// sup g_X(Y,Y)/g_Z(Y,Y) search. Each `hint` (x, X) adds the configuration
/// (−X, X, X), whose ratio is exactly (F(−X)/F(X))².
pub fn uniformity_search(
    model: &MetricModel,
    samples: usize,
    seed: u64,
    hints: &[Vec<f64>],
) -> Result<SupEstimate> {
    let n = model.dim();
    let starts: Vec<Vec<f64>> = hints
        .iter()
        .map(|h| {
            let x = &h[..n];
            let v = &h[n..2 * n];
            let mut p = x.to_vec();
            p.extend(v.iter().map(|c| -c));
            p.extend_from_slice(v);
            p.extend_from_slice(v);
            p
        })
        .collect();
    let mut est = sup_search(
        samples,
        seed,
        &starts,
        |rng| draw_config(model, rng, 3),
        |p| {
            let (x, v) = unpack(model, p, 3);
            if !v.iter().all(nonzero) {
                return f64::NAN;
            }
            if model.is_riemannian() {
                return 1.0;
            }
            let (gx, gz) = (model.gv(&x, &v[0]), model.gv(&x, &v[2]));
            let y = &v[1];
            y.dot(&(gx * y)) / y.dot(&(gz * y))
        },
    )?;
    est.value = est.value.max(1.0);
    Ok(est)
}

/// Estimate of the uniformity constant Λ_F.
pub fn uniformity(model: &MetricModel, samples: usize, seed: u64) -> Result<f64> {
    Ok(uniformity_search(model, samples, seed, &[])?.value)
}

/// Range [K_min, K_max] of sampled flag curvatures.
pub fn curvature_bounds(model: &MetricModel, samples: usize, seed: u64) -> Result<[f64; 2]> {
    let (lo, hi) = curvature_search(model, samples, seed)?;
    Ok([lo.value, hi.value])
}

/// Searches for the infimum and supremum of the flag curvature; the first
/// estimate holds the negated infimum.
fn curvature_search(
    model: &MetricModel,
    samples: usize,
    seed: u64,
) -> Result<(SupEstimate, SupEstimate)> {
    let k = |p: &[f64]| {
        let (x, v) = unpack(model, p, 2);
        model
            .flag_curvature(&x, v[0].as_slice(), v[1].as_slice())
            .unwrap_or(f64::NAN)
    };
    let draw = |rng: &mut ChaCha8Rng| draw_config(model, rng, 2);
    let mut lo = sup_search(samples, seed, &[], draw, |p| -k(p))?;
    let hi = sup_search(samples, seed, &[], draw, k)?;
    lo.value = -lo.value;
    Ok((lo, hi))
}

/// Largest sampled |T(x, y, v)| over unit y, v.
pub fn t_curvature_bound(model: &MetricModel, samples: usize, seed: u64) -> Result<f64> {
    Ok(t_curvature_search(model, samples, seed)?.value)
}

fn t_curvature_search(model: &MetricModel, samples: usize, seed: u64) -> Result<SupEstimate> {
    sup_search(
        samples,
        seed,
        &[],
        |rng| draw_config(model, rng, 2),
        |p| {
            let (x, v) = unpack(model, p, 2);
            if !v.iter().all(nonzero) {
                return f64::NAN;
            }
            let y = &v[0] / model.fv(&x, &v[0]);
            let w = &v[1] / model.fv(&x, &v[1]);
            model
                .t_curvature(&x, y.as_slice(), w.as_slice())
                .map(f64::abs)
                .unwrap_or(f64::NAN)
        },
    )
}

/// Diameter estimate: the largest forward shortest-path distance on the
/// F-weighted grid graph over the chart's fundamental domain, with edges to
/// all neighbors in {−1, 0, 1}ⁿ (8 in the plane) and weight F(p, q − p).
pub fn diameter_estimate(model: &MetricModel, grid_resolution: usize) -> Result<f64> {
    if grid_resolution < 3 {
        return Err(FinslerError::InvalidParameter(
            "grid_resolution must be at least 3".into(),
        ));
    }
    let chart = model.chart();
    let domain = chart.fundamental_domain()?;
    let n = model.dim();
    let m = grid_resolution;
    let periodic: Vec<bool> = chart.periods().iter().map(Option::is_some).collect();
    // periodic axes: m nodes without the duplicate endpoint; bounded: m nodes inclusive
    let spacing: Vec<f64> = (0..n)
        .map(|a| {
            let (lo, hi) = domain[a];
            if periodic[a] {
                (hi - lo) / m as f64
            } else {
                (hi - lo) / (m - 1) as f64
            }
        })
        .collect();
    let total = m.pow(n as u32);
    let index_of = |idx: &[usize]| idx.iter().rev().fold(0usize, |acc, &i| acc * m + i);
    let coords_of = |mut flat: usize| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let i = flat % m;
                flat /= m;
                i
            })
            .collect()
    };
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    d
                })
                .collect()
        })
        .filter(|o: &Vec<i64>| o.iter().any(|d| *d != 0))
        .collect();

    let mut graph: DiGraph<(), f64> = DiGraph::with_capacity(total, total * offsets.len());
    for _ in 0..total {
        graph.add_node(());
    }
    for flat in 0..total {
        let idx = coords_of(flat);
        let x: Vec<f64> = (0..n)
            .map(|a| domain[a].0 + spacing[a] * idx[a] as f64)
            .collect();
        'offsets: for off in &offsets {
            let mut target = vec![0usize; n];
            let mut step = vec![0.0; n];
            for a in 0..n {
                let j = idx[a] as i64 + off[a];
                if periodic[a] {
                    target[a] = j.rem_euclid(m as i64) as usize;
                } else if j < 0 || j >= m as i64 {
                    continue 'offsets;
                } else {
                    target[a] = j as usize;
                }
                step[a] = spacing[a] * off[a] as f64;
            }
            let w = model.f(&x, &step);
            graph.add_edge(NodeIndex::new(flat), NodeIndex::new(index_of(&target)), w);
        }
    }

    // distances are translation invariant on flat tori, so one source suffices
    let sources: Vec<usize> = if model.is_locally_minkowski() && periodic.iter().all(|p| *p) {
        vec![0]
    } else {
        (0..total).collect()
    };
    let mut diam = 0.0f64;
    for s in sources {
        let dist = petgraph::algo::dijkstra(&graph, NodeIndex::new(s), None, |e| *e.weight());
        if dist.len() < total {
            return Err(FinslerError::IntegrationFailure(
                "grid graph is not strongly connected".into(),
            ));
        }
        diam = dist.values().fold(diam, |a, b| a.max(*b));
    }
    Ok(diam)
}

/// A shortest closed geodesic found by homotopy-class enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedGeodesic {
    pub class: Vec<i64>,
    pub length: f64,
    /// F-length of the same loop traversed backwards.
    pub reverse_length: f64,
}

/// Shortest closed geodesic of a locally Minkowski torus: straight loops in
/// the classes with all |entries| ≤ `class_range`, length F(x, P·class).
pub fn shortest_closed_geodesic_torus(
    model: &MetricModel,
    class_range: i64,
) -> Result<ClosedGeodesic> {
    let periods: Option<Vec<f64>> = model.chart().periods().iter().copied().collect();
    let periods = periods.ok_or_else(|| {
        FinslerError::UnsupportedModel("closed-geodesic search needs a torus chart".into())
    })?;
    if !model.is_locally_minkowski() {
        return Err(FinslerError::UnsupportedModel(
            "closed-geodesic search only supports metrics with vanishing spray".into(),
        ));
    }
    if class_range < 1 {
        return Err(FinslerError::InvalidParameter(
            "class_range must be at least 1".into(),
        ));
    }
    let n = model.dim();
    let x = vec![0.0; n];
    let width = (2 * class_range + 1) as usize;
    let mut best: Option<ClosedGeodesic> = None;
    for mut c in 0..width.pow(n as u32) {
        let class: Vec<i64> = (0..n)
            .map(|_| {
                let v = (c % width) as i64 - class_range;
                c /= width;
                v
            })
            .collect();
        if class.iter().all(|v| *v == 0) {
            continue;
        }
        let loop_vec: Vec<f64> = class
            .iter()
            .zip(&periods)
            .map(|(k, p)| *k as f64 * p)
            .collect();
        let length = model.f(&x, &loop_vec);
        if best.as_ref().is_none_or(|b| length < b.length) {
            let back: Vec<f64> = loop_vec.iter().map(|v| -v).collect();
            best = Some(ClosedGeodesic {
                class,
                length,
                reverse_length: model.f(&x, &back),
            });
        }
    }
    Ok(best.expect("at least one nonzero class"))
}

/// The two-term injectivity lower bound min{π/(λ√K⁺), L/(1+λ)} assembled
/// from measured invariants, with symmetrized-distance variants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityDiagnostics {
    /// π/(λ̂√K_max⁺); +∞ when K_max ≤ 0.
    pub conj_bound: Extended,
    /// Shortest loop length over (1 + λ̂); +∞ when no loop search applies.
    pub loop_bound: Extended,
    pub thm3_3_min: Extended,
    /// π/√K_max⁺: conjugate term for the symmetrized distance.
    pub sym_conj_bound: Extended,
    /// Half the shortest symmetrized loop length ½(L + L_reverse)/2.
    pub sym_loop_bound: Extended,
    pub sym_min: Extended,
}

pub fn assemble_injectivity(
    lambda_hat: f64,
    k_max: f64,
    closed: Option<&ClosedGeodesic>,
) -> InjectivityDiagnostics {
    let kp = k_max.max(0.0);
    let conj = if kp > 0.0 {
        PI / (lambda_hat * kp.sqrt())
    } else {
        f64::INFINITY
    };
    let sym_conj = if kp > 0.0 {
        PI / kp.sqrt()
    } else {
        f64::INFINITY
    };
    let (loop_bound, sym_loop) = match closed {
        Some(c) => (
            c.length / (1.0 + lambda_hat),
            0.25 * (c.length + c.reverse_length),
        ),
        None => (f64::INFINITY, f64::INFINITY),
    };
    InjectivityDiagnostics {
        conj_bound: Extended(conj),
        loop_bound: Extended(loop_bound),
        thm3_3_min: Extended(conj.min(loop_bound)),
        sym_conj_bound: Extended(sym_conj),
        sym_loop_bound: Extended(sym_loop),
        sym_min: Extended(sym_conj.min(sym_loop)),
    }
}

/// Settings for a full invariant report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvariantSettings {
    pub samples: usize,
    pub seed: u64,
    pub grid_resolution: usize,
    pub class_range: i64,
    /// Angular quadrature order for volume densities (and grid nodes per axis).
    pub volume_order: usize,
}

impl Default for InvariantSettings {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 0,
            grid_resolution: 48,
            class_range: 3,
            volume_order: 64,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VolumePair {
    #[serde(rename = "BH")]
    pub bh: f64,
    #[serde(rename = "HT")]
    pub ht: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub samples: usize,
    pub reversibility: SupEstimate,
    pub uniformity: SupEstimate,
    pub curvature_min: SupEstimate,
    pub curvature_max: SupEstimate,
    pub t_curvature: SupEstimate,
}

/// Measured invariants of one model. Suprema are sampled lower bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantReport {
    pub model: String,
    pub lambda_hat: f64,
    #[serde(rename = "Lambda_hat")]
    pub uniformity_hat: f64,
    #[serde(rename = "K_range")]
    pub k_range: [f64; 2],
    #[serde(rename = "T_bound")]
    pub t_bound: f64,
    /// None for charts without a compact fundamental domain.
    pub diam_hat: Option<f64>,
    pub grid_resolution: usize,
    pub vol: Option<VolumePair>,
    pub closed_geodesic: Option<ClosedGeodesic>,
    pub injectivity: InjectivityDiagnostics,
    /// Injectivity lower bound from the measured (K⁺, T, Λ̂, diam, min volume).
    pub thm1_1: Option<BoundReport>,
    pub sample_meta: SampleMeta,
}

/// Runs every estimator and assembles the report.
pub fn invariant_report(model: &MetricModel, s: &InvariantSettings) -> Result<InvariantReport> {
    let rev = reversibility_search(model, s.samples, s.seed)?;
    let uni = uniformity_search(
        model,
        s.samples,
        s.seed.wrapping_add(1),
        std::slice::from_ref(&rev.argmax),
    )?;
    let (kmin, kmax) = curvature_search(model, s.samples, s.seed.wrapping_add(2))?;
    let t = t_curvature_search(model, s.samples, s.seed.wrapping_add(3))?;
    let compact = model.chart().fundamental_domain().is_ok();
    let diam = if compact {
        Some(diameter_estimate(model, s.grid_resolution)?)
    } else {
        None
    };
    let vol = if compact {
        Some(VolumePair {
            bh: model.volume(VolumeMeasure::Bh, s.volume_order)?,
            ht: model.volume(VolumeMeasure::Ht, s.volume_order)?,
        })
    } else {
        None
    };
    let closed = match shortest_closed_geodesic_torus(model, s.class_range) {
        Ok(c) => Some(c),
        Err(FinslerError::UnsupportedModel(_)) => None,
        Err(e) => return Err(e),
    };
    let injectivity = assemble_injectivity(rev.value, kmax.value, closed.as_ref());
    let thm1_1 = match (diam, &vol) {
        (Some(d), Some(v)) if model.dim() >= 2 => Some(thm1_1_injectivity_bound(
            model.dim(),
            kmax.value.max(0.0),
            t.value,
            uni.value,
            d,
            v.bh.min(v.ht),
        )?),
        _ => None,
    };
    Ok(InvariantReport {
        model: model.name().to_string(),
        lambda_hat: rev.value,
        uniformity_hat: uni.value,
        k_range: [kmin.value, kmax.value],
        t_bound: t.value,
        diam_hat: diam,
        grid_resolution: s.grid_resolution,
        vol,
        closed_geodesic: closed,
        injectivity,
        thm1_1,
        sample_meta: SampleMeta {
            seed: s.seed,
            samples: s.samples,
            reversibility: rev,
            uniformity: uni,
            curvature_min: kmin,
            curvature_max: kmax,
            t_curvature: t,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::catalog;

    #[test]
    fn euclidean_is_reversible_and_uniform() {
        let m = catalog::euclidean(2).unwrap();
        assert!((reversibility(&m, 20, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(uniformity(&m, 20, 1).unwrap(), 1.0);
    }

    #[test]
    fn berwald_torus_reversibility() {
        for n in [2.0, 10.0] {
            let m = catalog::berwald_torus(n).unwrap();
            let lam = reversibility(&m, 100, 3).unwrap();
            let exact = 2.0 * n - 1.0;
            assert!((lam - exact).abs() < 0.01 * exact, "{n}: {lam}");
        }
    }

    #[test]
    fn closed_geodesic_classes() {
        let m = catalog::berwald_torus(2.0).unwrap();
        let c = shortest_closed_geodesic_torus(&m, 3).unwrap();
        assert_eq!(c.class, vec![-1, 0]);
        assert!((c.length - PI).abs() < 1e-12);
        let flat = catalog::flat_torus().unwrap();
        assert!(
            (shortest_closed_geodesic_torus(&flat, 2).unwrap().length - 2.0 * PI).abs() < 1e-12
        );
        let curved = catalog::randers_nonparallel(0.2).unwrap();
        assert!(matches!(
            shortest_closed_geodesic_torus(&curved, 2),
            Err(FinslerError::UnsupportedModel(_))
        ));
    }

    #[test]
    fn flat_diameters() {
        let torus = catalog::flat_torus().unwrap();
        let d = diameter_estimate(&torus, 32).unwrap();
        assert!(
            (d - 2f64.sqrt() * PI).abs() < 0.03 * 2f64.sqrt() * PI,
            "{d}"
        );
        let square = catalog::euclidean(2).unwrap();
        let d = diameter_estimate(&square, 21).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 0.03 * 2f64.sqrt(), "{d}");
        assert!(diameter_estimate(&catalog::sphere_stereographic().unwrap(), 10).is_err());
    }

    #[test]
    fn injectivity_assembly() {
        let m = catalog::berwald_torus(2.0).unwrap();
        let c = shortest_closed_geodesic_torus(&m, 3).unwrap();
        let d = assemble_injectivity(3.0, 0.0, Some(&c));
        assert!((d.thm3_3_min.0 - PI / 4.0).abs() < 1e-12);
        assert_eq!(d.conj_bound.0, f64::INFINITY);
        let s = assemble_injectivity(1.0, 1.0, None);
        assert!((s.thm3_3_min.0 - PI).abs() < 1e-15);
    }
}
