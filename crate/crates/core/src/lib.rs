//! Kernel (RKHS) least-squares regression trained by SGD and GD, together with
//! the spectral machinery needed to study which eigen-direction the optimisation
//! error `b_t = alpha_t - alpha_hat` settles into.
//!
//! Module map:
//!
//! * [`kernels`]: kernel families, Gram matrices, synthetic data and diagonal-dominance analysis.
//! * [`spectral`]: Jacobi eigensolver, Gershgorin/interlacing utilities, the `P1`/`P-1`
//!   projection pair and an inequality verifier for near-diagonal Gram matrices.
//! * [`optim`]: closed-form interpolant, SGD/GD steps, step-size planning and schedule execution.
//! * [`metrics`]: Rayleigh quotients, estimation error, level-set bounds, Wilcoxon signed-rank test.
//! * [`experiment`]: seed-batched experiment harness and the theorem suite.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod kernels;
pub mod linalg;
pub mod metrics;
pub mod optim;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
