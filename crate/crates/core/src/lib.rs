//! Quantum-circuit estimators for `Tr{ρ^m}` and `Tr{ρ ln ρ}` of a mixed state
//! given as an ensemble of product-gate preparations.

pub mod ensemble;
pub mod error;
pub mod estimate;
pub mod fixtures;
pub mod gst;
pub mod ht;
pub mod noise_bounds;
pub mod qcore;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
pub use estimate::{EstimateMode, TraceEstimate};
