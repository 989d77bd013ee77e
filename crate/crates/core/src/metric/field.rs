//! Position-dependent coefficient fields: the Riemannian part `a_ij(x)` and
//! the 1-form `b_i(x)` of a Randers-type metric.

use std::fmt;
use std::sync::Arc;

use crate::error::{FinslerError, Result};
use crate::numeric::{Matrix, Vector};

pub type FieldFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A field of `components` real numbers over the chart.
#[derive(Clone)]
pub enum CoefficientField {
    Constant(Vec<f64>),
    Function { components: usize, f: FieldFn },
    Grid(GridTable),
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientField::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            CoefficientField::Function { components, .. } => f
                .debug_struct("Function")
                .field("components", components)
                .finish_non_exhaustive(),
            CoefficientField::Grid(g) => f.debug_tuple("Grid").field(&g.shape).finish(),
        }
    }
}

impl CoefficientField {
    pub fn constant_matrix(m: &Matrix) -> Self {
        CoefficientField::Constant(m.transpose().as_slice().to_vec())
    }

    pub fn function(
        components: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        CoefficientField::Function {
            components,
            f: Arc::new(f),
        }
    }

    pub fn components(&self) -> usize {
        match self {
            CoefficientField::Constant(v) => v.len(),
            CoefficientField::Function { components, .. } => *components,
            CoefficientField::Grid(g) => g.components,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientField::Constant(_))
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            CoefficientField::Constant(v) => v.clone(),
            CoefficientField::Function { f, .. } => f(x),
            CoefficientField::Grid(g) => g.interpolate(x),
        }
    }

    /// Row-major n×n matrix value.
    pub fn matrix(&self, x: &[f64], n: usize) -> Matrix {
        Matrix::from_row_slice(n, n, &self.eval(x))
    }

    pub fn vector(&self, x: &[f64]) -> Vector {
        Vector::from_vec(self.eval(x))
    }
}

/// Tabulated values on a regular grid, interpolated with tensor-product
/// Catmull–Rom cubics (C¹, exact on quadratics away from clamped edges).
#[derive(Clone, Debug)]
pub struct GridTable {
    lower: Vec<f64>,
    upper: Vec<f64>,
    shape: Vec<usize>,
    periodic: Vec<bool>,
    components: usize,
    /// Row-major over grid indices (last axis fastest), then components.
    values: Vec<f64>,
}

impl GridTable {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        shape: Vec<usize>,
        periodic: Vec<bool>,
        components: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let d = lower.len();
        if upper.len() != d || shape.len() != d || periodic.len() != d {
            return Err(FinslerError::Config(
                "grid lower/upper/shape/periodic lengths disagree".into(),
            ));
        }
        if shape.iter().any(|&s| s < 4) {
            return Err(FinslerError::Config(
                "cubic interpolation needs at least 4 grid nodes per axis".into(),
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(u > l)) {
            return Err(FinslerError::Config(
                "grid upper bound must exceed lower bound".into(),
            ));
        }
        let nodes: usize = shape.iter().product();
        if values.len() != nodes * components {
            return Err(FinslerError::Config(format!(
                "grid expects {} values ({} nodes × {} components), got {}",
                nodes * components,
                nodes,
                components,
                values.len()
            )));
        }
        Ok(Self {
            lower,
            upper,
            shape,
            periodic,
            components,
            values,
        })
    }

    /// Tabulates `f` at the grid nodes.
    pub fn sample(
        lower: Vec<f64>,
        upper: Vec<f64>,
        shape: Vec<usize>,
        periodic: Vec<bool>,
        components: usize,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let mut table = Self::new(
            lower,
            upper,
            shape.clone(),
            periodic,
            components,
            vec![0.0; shape.iter().product::<usize>() * components],
        )?;
        let nodes: usize = shape.iter().product();
        for flat in 0..nodes {
            let idx = table.unflatten(flat);
            let x: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(a, &i)| table.lower[a] + i as f64 * table.spacing(a))
                .collect();
            let v = f(&x);
            table.values[flat * components..(flat + 1) * components].copy_from_slice(&v);
        }
        Ok(table)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn spacing(&self, axis: usize) -> f64 {
        let span = self.upper[axis] - self.lower[axis];
        if self.periodic[axis] {
            span / self.shape[axis] as f64
        } else {
            span / (self.shape[axis] - 1) as f64
        }
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    fn node_index(&self, axis: usize, i: i64) -> usize {
        let s = self.shape[axis] as i64;
        if self.periodic[axis] {
            i.rem_euclid(s) as usize
        } else {
            i.clamp(0, s - 1) as usize
        }
    }

    pub fn interpolate(&self, x: &[f64]) -> Vec<f64> {
        let d = self.shape.len();
        // per axis: the four node indices and their Catmull–Rom weights
        let mut stencil: Vec<([usize; 4], [f64; 4])> = Vec::with_capacity(d);
        for (a, xa) in x.iter().enumerate().take(d) {
            let h = self.spacing(a);
            let mut u = (xa - self.lower[a]) / h;
            if !self.periodic[a] {
                u = u.clamp(0.0, (self.shape[a] - 1) as f64);
            }
            let base = u.floor();
            let t = u - base;
            let b = base as i64;
            let idx = [
                self.node_index(a, b - 1),
                self.node_index(a, b),
                self.node_index(a, b + 1),
                self.node_index(a, b + 2),
            ];
            let (t2, t3) = (t * t, t * t * t);
            let w = [
                0.5 * (-t + 2.0 * t2 - t3),
                0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
                0.5 * (t + 4.0 * t2 - 3.0 * t3),
                0.5 * (-t2 + t3),
            ];
            stencil.push((idx, w));
        }

        let mut out = vec![0.0; self.components];
        let total = 4usize.pow(d as u32);
        for combo in 0..total {
            let mut rem = combo;
            let mut weight = 1.0;
            let mut flat = 0usize;
            for (a, (idx, w)) in stencil.iter().enumerate() {
                let s = rem % 4;
                rem /= 4;
                weight *= w[s];
                flat = flat * self.shape[a] + idx[s];
            }
            if weight == 0.0 {
                continue;
            }
            let vals = &self.values[flat * self.components..(flat + 1) * self.components];
            for (o, v) in out.iter_mut().zip(vals) {
                *o += weight * v;
            }
        }
        out
    }
}
