//! Global testing of community structure in undirected networks under the
//! mixed-membership stochastic block model.
//!
//! The crate provides:
//! - seeded generation of model networks and edge-list IO ([`model`]);
//! - the degree-based chi-square, orthodox signed quadrilateral, and
//!   power enhancement test statistics with calibrated p-values, plus the
//!   general signed cycle/path family and their exhaustive oracles
//!   ([`stats`]);
//! - normal and chi-square(2) distribution functions ([`dist`]);
//! - theoretical SNR quantities, regularity diagnostics, and preset model
//!   scenarios ([`theory`], [`presets`]);
//! - the intrinsic number of communities of a probability matrix
//!   ([`inc`]);
//! - a config-driven Monte Carlo experiment runner ([`experiment`]).

pub mod dist;
pub mod error;
pub mod experiment;
pub mod inc;
pub mod matrix;
pub mod model;
pub mod presets;
pub mod rng;
pub mod stats;
pub mod summary;
pub mod theory;

pub use error::{Error, Result};
