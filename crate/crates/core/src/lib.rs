//! Numerical Finsler geometry on a single chart.
//!
//! The crate evaluates pointwise tensors of a Finsler metric (fundamental and
//! Cartan tensors, Chern connection, curvature), integrates geodesics,
//! parallel transport and Jacobi fields, estimates global invariants by
//! sampling, evaluates comparison-geometry bounds, solves for centers of
//! mass, and checks comparison inequalities on sampled configurations.

// `!(x > 0.0)` guards are used on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod centermass;
pub mod config;
pub mod connection;
pub mod error;
pub mod flows;
pub mod invariants;
pub mod metric;
pub mod numeric;
pub mod report;
pub mod verify;

pub use error::{FinslerError, Result};
pub use metric::{catalog, ChartPoint, MetricModel, Tangent};
