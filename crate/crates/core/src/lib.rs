//! Sparsity testing for high-dimensional linear regression.

pub mod constants;
pub mod error;
pub mod general;
pub mod harness;
pub mod independent;
pub mod kernels;
pub mod model;
pub mod report;
pub mod rng;
pub mod solvers;

pub use constants::{Constant, DesignConstants, Provenance, ThresholdMode};
pub use error::{Error, Result};
