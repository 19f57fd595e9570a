//! Monotone norms whose p-th powers are supermodular, their approximation, numeric
//! certification, and the online algorithms driven by them.
//!
//! - [`norm`]: the [`NormDescriptor`] abstraction, built-in norms, composition, smoothing.
//! - [`orlicz`]: Orlicz norms and the approximation pipeline.
//! - [`symmetric`]: Top-k decomposition and the approximation of symmetric norms.
//! - [`certify`]: sampled checks and refutations of supermodularity-type properties.
//! - [`online`]: load balancing, covering, packing and online linear optimization.
//! - [`probing`]: stochastic probing, adaptivity gaps and decoupling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod norm;
pub mod online;
pub mod orlicz;
pub mod probing;
pub mod sampling;
pub mod symmetric;
pub mod vector;

pub use error::{Error, Result};
pub use norm::{GradientVector, NormDescriptor, NormKind};
pub use orlicz::OrliczFunction;
pub use vector::NonNegVector;
