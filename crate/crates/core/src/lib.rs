//! Multi-cell massive MIMO uplink simulation with time-multiplexed (TP),
//! superimposed (SP) and hybrid pilot schemes.
//!
//! Users are addressed by a flattened index `n = ℓ·K + k` (cell `ℓ`, user `k`).
//! All measurements are taken at the reference base station, cell 0, which
//! is the centre of the hexagonal layout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod config;
pub mod error;
pub mod estimators;
pub mod hybrid;
pub mod iterative;
pub mod linalg;
pub mod rng;
pub mod simharness;
pub mod sysmodel;
pub mod waveform;

pub use config::{RhoRule, Scenario, SystemConfig};
pub use error::{Error, Result};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;

/// Index of the base station at which all metrics are collected.
pub const REFERENCE_CELL: usize = 0;
