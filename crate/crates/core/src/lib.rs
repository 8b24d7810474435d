//! Convex M-estimation toolkit.
//!
//! * [`convex`]: objectives, smooth and non-smooth minimisers, and the
//!   argmin-nearness diagnostic for convex approximations.
//! * [`estimators`]: location, regression, GLM, survival and Markov
//!   pseudo-likelihood fits.
//! * [`asymptotics`]: sandwich covariances plus Lindeberg-type and
//!   log-sum-exp expansion diagnostics.
//! * [`simulation`]: scenario generators, a deterministic replication engine
//!   and Monte Carlo checks of the limiting laws.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Modules import `num_traits::Float` with `allow(unused_imports)`: when std is
// in the build graph its inherent float methods shadow the trait.

extern crate alloc;

pub mod asymptotics;
pub mod convex;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod quadrature;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
