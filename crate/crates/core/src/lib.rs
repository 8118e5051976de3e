//! Single-ended transmission-line fault location.
//!
//! A fault record is first reduced to a handful of system parameters (source
//! impedance, loading angle, inception angle and a fault-resistance interval)
//! using a mode-domain circuit model. Those estimates select a matching
//! subset of a pre-simulated fault library, and a small neural regressor
//! trained on that subset maps the record's fault window to a distance.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod dataset;
pub mod emt;
pub mod error;
pub mod estimation;
pub mod fault;
pub mod mlp;
pub mod pipeline;
pub mod presets;
pub mod records;
pub mod signals;

pub use error::{Error, Result, Stage};
pub use fault::{CanonicalFault, FaultType, Mode};
