//! Closed-form comparison bounds and the constants that feed them.
//!
//! Everything here is a pure function of a handful of real parameters: the
//! comparison function s_k, injectivity/length/convexity lower bounds,
//! the center-of-mass radius, the admissibility test for the finiteness
//! construction (constants C₀…C₃) and the packing count.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::metric::measure::unit_sphere_area;
use crate::numeric::gauss_legendre;
use crate::report::Extended;

/// Solution of y″ + ky = 0, y(0) = 0, y′(0) = 1.
pub fn s_k(k: f64, t: f64) -> f64 {
    if k > 0.0 {
        let r = k.sqrt();
        (r * t).sin() / r
    } else if k < 0.0 {
        let r = (-k).sqrt();
        (r * t).sinh() / r
    } else {
        t
    }
}

/// Derivative of [`s_k`] in t.
pub fn s_k_prime(k: f64, t: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * t).cos()
    } else if k < 0.0 {
        ((-k).sqrt() * t).cosh()
    } else {
        1.0
    }
}

const QUAD_TOL: f64 = 1e-12;

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(12))
}

fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl_rule();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    nodes
        .iter()
        .zip(weights)
        .map(|(z, w)| w * f(mid + half * z))
        .sum::<f64>()
        * half
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, a, m);
    let right = gl_panel(f, m, b);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= tol.max(1e-15 * refined.abs()) {
        return refined;
    }
    adaptive(f, a, m, left, 0.5 * tol, depth - 1) + adaptive(f, m, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Legendre quadrature of f on [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gl_panel(&f, a, b);
    adaptive(&f, a, b, whole, QUAD_TOL, 40)
}

/// ∫₀ᵀ s_k(t)^{n−1} dt.
pub fn s_k_integral(k: f64, n: usize, t_end: f64) -> f64 {
    if t_end.is_infinite() {
        return if t_end > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    if n == 1 {
        return t_end;
    }
    if k == 0.0 {
        return t_end.powi(n as i32) / n as f64;
    }
    integrate(|t| s_k(k, t).powi(n as i32 - 1), 0.0, t_end)
}

/// π/√k, or +∞ for k ≤ 0.
fn pi_over_sqrt(k: f64) -> f64 {
    if k > 0.0 {
        PI / k.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Bisection for a sign change of f on [lo, hi] with f(lo) and f(hi) of
/// opposite signs (or f(hi) = 0); stops once the bracket is below `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest T such that `holds` is true on all of (0, T]. The search is limited
/// to (0, t_max]; t_max may be +∞, in which case a doubling bracket is used
/// and +∞ is returned if no failure shows up below 1e8.
pub fn admissible_sup(holds: impl Fn(f64) -> bool, t_max: f64) -> f64 {
    const SCAN: usize = 4096;
    const HORIZON: f64 = 1e8;
    let (lo, hi) = if t_max.is_finite() {
        (0.0, t_max)
    } else {
        let mut hi = 1.0;
        let mut lo = 0.0;
        while holds(hi) {
            if hi > HORIZON {
                return f64::INFINITY;
            }
            lo = hi;
            hi *= 2.0;
        }
        (lo, hi)
    };
    let mut prev = lo;
    for i in 1..=SCAN {
        let t = lo + (hi - lo) * i as f64 / SCAN as f64;
        if !holds(t) {
            let root = bisect(
                |s| if holds(s) { 1.0 } else { -1.0 },
                prev,
                t,
                1e-14 * t.max(1.0),
            );
            return root;
        }
        prev = t;
    }
    hi
}

/// How the arms of a bound combine into its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    Min,
    Max,
    Single,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundArm {
    pub label: String,
    pub value: Extended,
}

/// An evaluated bound with its individual min/max arms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, Extended>,
    pub value: Extended,
    pub combine: Combine,
    pub sub_terms: Vec<BoundArm>,
    /// Related quantities that do not enter `value`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, Extended>,
}

impl BoundReport {
    fn new(name: &str, inputs: &[(&str, f64)], combine: Combine, arms: Vec<(&str, f64)>) -> Self {
        let value = match combine {
            Combine::Min => arms.iter().map(|a| a.1).fold(f64::INFINITY, f64::min),
            Combine::Max => arms.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max),
            Combine::Single => arms[0].1,
        };
        Self {
            name: name.into(),
            inputs: inputs
                .iter()
                .map(|(k, v)| (k.to_string(), Extended(*v)))
                .collect(),
            value: Extended(value),
            combine,
            sub_terms: arms
                .into_iter()
                .map(|(label, v)| BoundArm {
                    label: label.into(),
                    value: Extended(v),
                })
                .collect(),
            extras: BTreeMap::new(),
        }
    }

    pub fn value(&self) -> f64 {
        self.value.0
    }

    pub fn arm(&self, label: &str) -> Option<f64> {
        self.sub_terms
            .iter()
            .find(|a| a.label == label)
            .map(|a| a.value.0)
    }

    /// Recombines the arms; equals `value` exactly for every report built here.
    pub fn recombined(&self) -> f64 {
        let vals = self.sub_terms.iter().map(|a| a.value.0);
        match self.combine {
            Combine::Min => vals.fold(f64::INFINITY, f64::min),
            Combine::Max => vals.fold(f64::NEG_INFINITY, f64::max),
            Combine::Single => self.sub_terms[0].value.0,
        }
    }
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(FinslerError::InvalidParameter(what.into()))
    }
}

fn check_common(n: usize, k: f64, tau: f64, lambda: f64, d: f64, v: f64) -> Result<()> {
    require(n >= 2, "n must be at least 2")?;
    require(k.is_finite(), "k must be finite")?;
    require(
        tau >= 0.0 && tau.is_finite(),
        "tau must be a nonnegative number",
    )?;
    require(
        lambda >= 1.0 && lambda.is_finite(),
        "Lambda must be at least 1",
    )?;
    require(d > 0.0 && d.is_finite(), "D must be positive")?;
    require(v > 0.0, "V must be positive")
}

/// Injectivity-radius lower bound for compact manifolds with K ≤ k, T-curvature
/// bound τ, uniformity constant Λ, diameter D and volume V.
pub fn thm1_1_injectivity_bound(
    n: usize,
    k: f64,
    tau: f64,
    lambda: f64,
    d: f64,
    v: f64,
) -> Result<BoundReport> {
    check_common(n, k, tau, lambda, d, v)?;
    require(k >= 0.0, "k must be nonnegative")?;
    let sl = lambda.sqrt();
    let scale = 1.0 / (1.0 + sl);
    let conj = if k > 0.0 {
        (1.0 + 1.0 / sl) * PI / k.sqrt()
    } else {
        f64::INFINITY
    };
    let bracket =
        s_k(-k, d).powi(n as i32 - 1) / (n - 1) as f64 + sl * tau * s_k_integral(-k, n, d);
    let vol = v / (unit_sphere_area(n - 2) * lambda.powf(1.5 * n as f64) * bracket);
    let mut report = BoundReport::new(
        "thm1.1",
        &[
            ("n", n as f64),
            ("k", k),
            ("tau", tau),
            ("Lambda", lambda),
            ("D", d),
            ("V", v),
        ],
        Combine::Min,
        vec![("conjugate", scale * conj), ("volume", scale * vol)],
    );
    if n.is_multiple_of(2) && k > 0.0 {
        // even-dimensional, positively curved shortcuts with λ ≤ √Λ
        report
            .extras
            .insert("even_dim_orientable".into(), Extended(PI / (sl * k.sqrt())));
        report.extras.insert(
            "even_dim_non_orientable".into(),
            Extended(PI / (sl * (1.0 + sl) * k.sqrt())),
        );
    }
    Ok(report)
}

/// Length lower bound for simple closed geodesics when K ≥ k.
pub fn thm3_6_length_bound(
    n: usize,
    k: f64,
    tau: f64,
    lambda: f64,
    d: f64,
    v: f64,
) -> Result<BoundReport> {
    check_common(n, k, tau, lambda, d, v)?;
    let cap = if k > 0.0 {
        d.min(0.5 * PI / k.sqrt())
    } else {
        d
    };
    let bracket = s_k(k, cap).powi(n as i32 - 1) / (n - 1) as f64
        + lambda.sqrt() * tau * s_k_integral(k, n, d);
    let vol = v / (unit_sphere_area(n - 2) * lambda.powf(1.5 * n as f64) * bracket);
    Ok(BoundReport::new(
        "thm3.6",
        &[
            ("n", n as f64),
            ("k", k),
            ("tau", tau),
            ("Lambda", lambda),
            ("D", d),
            ("V", v),
        ],
        Combine::Single,
        vec![("volume", vol)],
    ))
}

/// Convexity-radius lower bound for Berwald manifolds with K ≤ k,
/// injectivity radius ≥ σ and reversibility λ.
pub fn thm4_2_convexity_bound(k: f64, sigma: f64, lambda: f64) -> Result<BoundReport> {
    require(k >= 0.0 && k.is_finite(), "k must be nonnegative")?;
    require(sigma > 0.0, "sigma must be positive")?;
    require(
        lambda >= 1.0 && lambda.is_finite(),
        "lambda must be at least 1",
    )?;
    Ok(BoundReport::new(
        "thm4.2",
        &[("k", k), ("sigma", sigma), ("lambda", lambda)],
        Combine::Min,
        vec![
            ("curvature", 0.5 * pi_over_sqrt(k)),
            ("injectivity", sigma / (lambda * (1.0 + lambda))),
        ],
    ))
}

/// First positive zero of s_k′ − ξ s_k, or +∞ if there is none.
pub fn remark4_3_v(k: f64, xi: f64) -> f64 {
    let f = |t: f64| s_k_prime(k, t) - xi * s_k(k, t);
    let tol = 1e-15;
    if k > 0.0 {
        // f(0) = 1 and f(π/√k) = −1
        return bisect(f, 0.0, PI / k.sqrt(), tol);
    }
    // k ≤ 0: f starts at 1 and crosses zero at most once
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        if hi > 1e8 {
            return f64::INFINITY;
        }
        hi *= 2.0;
    }
    bisect(f, 0.0, hi, tol * hi.max(1.0))
}

/// Largest t in (0, π/(2√k)) with (√k t cosh √k t − sinh √k t)/(√k s_k(t)) ≤ 1/(20Λ).
pub fn t_frak(k: f64, lambda: f64) -> f64 {
    if k <= 0.0 {
        return f64::INFINITY;
    }
    // with u = √k t the ratio is (u cosh u − sinh u)/sin u, increasing from 0
    let target = 1.0 / (20.0 * lambda);
    let ratio = |u: f64| (u * u.cosh() - u.sinh()) / u.sin() - target;
    let u = bisect(ratio, 0.0, 0.5 * PI, 1e-15);
    u / k.sqrt()
}

/// Radius 𝔯 = (1/(2Λ))·min{π/(2√k), ς/(1+√Λ), 𝔱, 1/(40Λ²)} of the ball on
/// which the center of mass exists and is unique.
pub fn mass_radius(n: usize, k: f64, lambda: f64, sigma: f64) -> f64 {
    mass_radius_report(n, k, lambda, sigma)
        .map(|r| r.value())
        .unwrap_or(f64::NAN)
}

pub fn mass_radius_report(n: usize, k: f64, lambda: f64, sigma: f64) -> Result<BoundReport> {
    require(n >= 1, "n must be positive")?;
    require(k >= 0.0 && k.is_finite(), "k must be nonnegative")?;
    require(
        lambda >= 1.0 && lambda.is_finite(),
        "Lambda must be at least 1",
    )?;
    require(sigma > 0.0, "sigma must be positive")?;
    let s = 1.0 / (2.0 * lambda);
    Ok(BoundReport::new(
        "mass_radius",
        &[
            ("n", n as f64),
            ("k", k),
            ("Lambda", lambda),
            ("sigma", sigma),
        ],
        Combine::Min,
        vec![
            ("curvature", s * 0.5 * pi_over_sqrt(k)),
            ("injectivity", s * sigma / (1.0 + lambda.sqrt())),
            ("jacobi", s * t_frak(k, lambda)),
            ("uniformity", s / (40.0 * lambda * lambda)),
        ],
    ))
}

/// Default for the holonomy constant 𝔠(n, k, Λ), obtained by chaining the
/// polarized-curvature bound through the triangle construction.
pub fn holonomy_constant_default(n: usize, k: f64, lambda: f64) -> f64 {
    let sl = lambda.sqrt();
    16.0 / 3.0
        * n as f64
        * k.max(0.0).sqrt()
        * (0.5 * PI).sinh()
        * (1.0 + sl).powi(2)
        * lambda.powi(6)
}

/// sup{t : s_{−k}(3Λ^{5/2}t)/(3Λ^{5/2}t) ≤ 2}.
pub fn c0(k: f64, lambda: f64) -> f64 {
    if k <= 0.0 {
        return f64::INFINITY;
    }
    let a = 3.0 * lambda.powf(2.5);
    admissible_sup(|t| s_k(-k, a * t) / (a * t) <= 2.0, f64::INFINITY)
}

/// sup{t : ∫₀^{Λt} s_{−k}^{n−1} / ∫₀^{t/(4Λ)} s_k^{n−1} ≤ 2(4Λ²)ⁿ}.
pub fn c1(n: usize, k: f64, lambda: f64) -> f64 {
    if k <= 0.0 {
        return f64::INFINITY;
    }
    let bound = 2.0 * (4.0 * lambda * lambda).powi(n as i32);
    let ratio = |t: f64| s_k_integral(-k, n, lambda * t) / s_k_integral(k, n, t / (4.0 * lambda));
    admissible_sup(|t| ratio(t) <= bound, 4.0 * lambda * PI / k.sqrt())
}

/// sup{t : (t/s_{−k}(t))·(s_k(Λ^{3/2}t)/s_{−k}(√Λ t)) ≥ 1 − kt²}.
pub fn c2(k: f64, lambda: f64) -> f64 {
    if k <= 0.0 {
        return f64::INFINITY;
    }
    let l32 = lambda.powf(1.5);
    let sl = lambda.sqrt();
    let holds = |t: f64| (t / s_k(-k, t)) * (s_k(k, l32 * t) / s_k(-k, sl * t)) >= 1.0 - k * t * t;
    admissible_sup(holds, PI / (l32 * k.sqrt()))
}

/// C₃ = 6Λ³R/s_k(√ΛR)·(s_{−k}(√ΛR)/(√ΛR) − 1)·s_{−k}(√ΛR)/s_k(√ΛR) + 30Λ³𝔠R² + Λε₂.
pub fn c3(k: f64, lambda: f64, r: f64, eps2: f64, frak_c: f64) -> f64 {
    let q = lambda.sqrt() * r;
    let sk = s_k(k, q);
    if !(sk > 0.0) {
        return f64::INFINITY;
    }
    let smk = s_k(-k, q);
    let l3 = lambda.powi(3);
    6.0 * l3 * r / sk * (smk / q - 1.0) * smk / sk + 30.0 * l3 * frak_c * r * r + lambda * eps2
}

/// Outcome of the admissibility test for (R, ε₁, ε₂).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionDelta {
    pub inputs: BTreeMap<String, Extended>,
    #[serde(rename = "C0")]
    pub c0: Extended,
    #[serde(rename = "C1")]
    pub c1: Extended,
    #[serde(rename = "C2")]
    pub c2: Extended,
    #[serde(rename = "C3")]
    pub c3: Extended,
    /// The holonomy constant 𝔠 that entered C₃.
    pub frak_c: Extended,
    /// The mass radius 𝔯.
    pub frak_r: Extended,
    /// min{𝔯/(40Λ⁴), C₀, C₁, C₂}.
    pub radius_cap: Extended,
    pub eps1_cap: Extended,
    pub radius_ok: bool,
    pub eps_ok: bool,
    pub margin_ok: bool,
    pub satisfied: bool,
    /// (1 − kR²)/Λ⁵ − C₃ − 2^{2n+6}Λ^{4n+6}ε₁/s_k(√ΛR); must be positive.
    pub margin: Extended,
}

/// Checks the three admissibility conditions. `sigma` is the injectivity
/// lower bound used for 𝔯; `frak_c` defaults to [`holonomy_constant_default`].
#[allow(clippy::too_many_arguments)]
pub fn condition_delta(
    n: usize,
    k: f64,
    lambda: f64,
    r: f64,
    eps1: f64,
    eps2: f64,
    sigma: f64,
    frak_c: Option<f64>,
) -> Result<ConditionDelta> {
    require(n >= 2, "n must be at least 2")?;
    require(k >= 0.0 && k.is_finite(), "k must be nonnegative")?;
    require(
        lambda >= 1.0 && lambda.is_finite(),
        "Lambda must be at least 1",
    )?;
    require(r > 0.0 && r.is_finite(), "R must be positive")?;
    require(eps1 > 0.0, "eps1 must be positive")?;
    require(eps2 > 0.0, "eps2 must be positive")?;
    require(sigma > 0.0, "sigma must be positive")?;
    let frak_c = frak_c.unwrap_or_else(|| holonomy_constant_default(n, k, lambda));
    require(frak_c >= 0.0, "the holonomy constant must be nonnegative")?;

    let frak_r = mass_radius(n, k, lambda, sigma);
    let (c0v, c1v, c2v) = (c0(k, lambda), c1(n, k, lambda), c2(k, lambda));
    let radius_cap = (frak_r / (40.0 * lambda.powi(4)))
        .min(c0v)
        .min(c1v)
        .min(c2v);
    let eps1_cap = r / (12.0 * lambda.powi(3));
    let c3v = c3(k, lambda, r, eps2, frak_c);
    let sk = s_k(k, lambda.sqrt() * r);
    let margin = if sk > 0.0 {
        (1.0 - k * r * r) / lambda.powi(5)
            - c3v
            - 2f64.powi(2 * n as i32 + 6) * lambda.powi(4 * n as i32 + 6) * eps1 / sk
    } else {
        f64::NEG_INFINITY
    };
    let radius_ok = r <= radius_cap;
    let eps_ok = eps1 <= eps1_cap;
    let margin_ok = margin > 0.0;
    Ok(ConditionDelta {
        inputs: [
            ("n", n as f64),
            ("k", k),
            ("Lambda", lambda),
            ("R", r),
            ("eps1", eps1),
            ("eps2", eps2),
            ("sigma", sigma),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), Extended(b)))
        .collect(),
        c0: Extended(c0v),
        c1: Extended(c1v),
        c2: Extended(c2v),
        c3: Extended(c3v),
        frak_c: Extended(frak_c),
        frak_r: Extended(frak_r),
        radius_cap: Extended(radius_cap),
        eps1_cap: Extended(eps1_cap),
        radius_ok,
        eps_ok,
        margin_ok,
        satisfied: radius_ok && eps_ok && margin_ok,
        margin: Extended(margin),
    })
}

/// Λ^{2n}·∫₀^{ΛR_big} s_{−k}^{n−1} / ∫₀^{R_small/(4Λ)} s_k^{n−1}: how many
/// disjoint small balls fit in a large one.
pub fn packing_count(n: usize, k: f64, lambda: f64, r_big: f64, r_small: f64) -> Result<f64> {
    require(n >= 1, "n must be positive")?;
    require(
        lambda >= 1.0 && lambda.is_finite(),
        "Lambda must be at least 1",
    )?;
    require(r_big > 0.0 && r_small > 0.0, "radii must be positive")?;
    let inner = r_small / (4.0 * lambda);
    if k > 0.0 && inner >= PI / k.sqrt() {
        return Err(FinslerError::InvalidParameter(
            "R_small/(4 Lambda) must stay below pi/sqrt(k)".into(),
        ));
    }
    let den = s_k_integral(k, n, inner);
    if !(den > 0.0) {
        return Err(FinslerError::InvalidParameter(
            "denominator integral is not positive".into(),
        ));
    }
    Ok(lambda.powi(2 * n as i32) * s_k_integral(-k, n, lambda * r_big) / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_function_values() {
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(s_k(0.0, t), t);
        }
        assert!((s_k(1.0, PI / 2.0) - 1.0).abs() < 1e-15);
        assert!((s_k(-4.0, 1.0) - 2f64.sinh() / 2.0).abs() < 1e-15);
        assert!((s_k_integral(1.0, 2, PI) - 2.0).abs() < 1e-12);
        assert!((s_k_integral(-1.0, 3, 1.5) - (0.25 * 3f64.sinh() - 0.75)).abs() < 1e-12);
    }

    #[test]
    fn injectivity_bound_example() {
        let r = thm1_1_injectivity_bound(2, 1.0, 0.0, 1.0, PI, 4.0 * PI * PI).unwrap();
        let expected = 0.5 * (2.0 * PI).min(4.0 * PI * PI / (2.0 * PI.sinh()));
        assert!((r.value() - expected).abs() < 1e-12);
        assert_eq!(r.value(), r.recombined());
        let flat = thm1_1_injectivity_bound(2, 0.0, 0.0, 4.0, 1.0, 1.0).unwrap();
        assert_eq!(flat.arm("conjugate"), Some(f64::INFINITY));
        assert_eq!(flat.value(), flat.arm("volume").unwrap());
        let huge = thm1_1_injectivity_bound(2, 1.0, 0.0, 1.0, PI, 1e12).unwrap();
        assert!((huge.value() - PI).abs() < 1e-12);
    }

    #[test]
    fn length_and_convexity_examples() {
        let r = thm3_6_length_bound(2, 0.0, 0.0, 1.0, PI, 4.0 * PI * PI).unwrap();
        assert!((r.value() - 2.0 * PI).abs() < 1e-12);
        let c = thm4_2_convexity_bound(1.0, PI, 1.0).unwrap();
        assert!((c.value() - PI / 2.0).abs() < 1e-15);
        assert_eq!(thm4_2_convexity_bound(0.0, 3.0, 2.0).unwrap().value(), 0.5);
        assert!((thm4_2_convexity_bound(1.0, 10.0, 2.0).unwrap().value() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn remark_zero_examples() {
        assert!((remark4_3_v(1.0, 0.0) - PI / 2.0).abs() < 1e-12);
        assert!((remark4_3_v(1.0, 1.0) - PI / 4.0).abs() < 1e-12);
        assert!((remark4_3_v(4.0, 0.0) - PI / 4.0).abs() < 1e-12);
        assert!((remark4_3_v(0.0, 2.0) - 0.5).abs() < 1e-12);
        assert_eq!(remark4_3_v(0.0, 0.0), f64::INFINITY);
        assert!((remark4_3_v(-1.0, 2.0) - 0.5f64.atanh()).abs() < 1e-12);
    }

    #[test]
    fn jacobi_time_and_mass_radius() {
        assert_eq!(t_frak(0.0, 1.0), f64::INFINITY);
        let t = t_frak(1.0, 1.0);
        assert!(((t * t.cosh() - t.sinh()) / t.sin() - 0.05).abs() < 1e-12);
        assert!(t_frak(1.0, 2.0) < t);
        assert!((mass_radius(2, 0.0, 1.0, 1.0) - 1.0 / 80.0).abs() < 1e-15);
        assert!((mass_radius(2, 1.0, 1.0, 100.0) - 1.0 / 80.0).abs() < 1e-15);
    }

    #[test]
    fn admissibility_constants() {
        let c = c0(1.0, 1.0);
        assert!(
            (3.0 * c - 2.1773).abs() < 1e-4 && ((3.0 * c).sinh() / (3.0 * c) - 2.0).abs() < 1e-10
        );
        assert_eq!(c2(0.0, 3.0), f64::INFINITY);
        assert_eq!(c1(2, 0.0, 1.0), f64::INFINITY);
        let c1v = c1(2, 1.0, 1.0);
        assert!(c1v.is_finite() && c1v > 0.0);
        let r = 1e-6;
        let eps1 = r / 12.0;
        let d = condition_delta(2, 0.0, 1.0, r, eps1, 1e-3, 1.0, None).unwrap();
        assert!(d.eps_ok);
    }

    #[test]
    fn packing_examples() {
        assert!((packing_count(2, 0.0, 1.0, 0.7, 0.7).unwrap() - 16.0).abs() < 1e-12);
        let expected = (1f64.cosh() - 1.0) / (1.0 - 0.25f64.cos());
        assert!((packing_count(2, 1.0, 1.0, 1.0, 1.0).unwrap() - expected).abs() < 1e-9 * expected);
        assert!(packing_count(2, 1.0, 1.0, 1.0, 20.0).is_err());
    }
}
