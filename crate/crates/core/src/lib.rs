//! Desk-scale laboratory for wave propagation against fractal measures.
//!
//! The crate builds discrete stand-ins for fractal measures, decomposes them
//! into Littlewood-Paley pieces on a periodic grid, propagates them with the
//! half-wave and cosine propagators, and fits the power laws of the resulting
//! space-time norms over dyadic scales.

// Guards written as `!(x > 0.0)` reject NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod distance;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod measures;
pub mod norms;
pub mod nullform;
pub mod numeric;
pub mod wave;

pub use error::{LabError, Result};
