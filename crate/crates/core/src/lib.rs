//! Physics-informed neural networks with symmetry-group based domain
//! decomposition (sdPINN).
//!
//! The crate solves forward and inverse problems for two forced PDE
//! benchmarks — a Korteweg–de Vries equation and a nonlinear viscous fluid
//! equation — by training small tanh networks against PDE residuals.
//! A one-parameter Lie point symmetry of each equation supplies
//!
//! * dividing lines (level sets of the group invariant) that split the
//!   space-time rectangle into independent sub-domains,
//! * exactly labeled interface data transported along group orbits, and
//! * an invariant-surface-condition penalty that further constrains training.
//!
//! Module map:
//!
//! * [`mlp`] — network architecture, Xavier init, plain forward pass
//! * [`jet`] — Taylor-mode derivatives (u, u_t, u_x, u_xx, u_xxx) and
//!   reverse accumulation of loss gradients
//! * [`lbfgs`] — L-BFGS with a strong-Wolfe line search
//! * [`symmetry`] — one-parameter group actions, invariants, orbits
//! * [`geometry`] — rectangle, invariant-band partition, sampling
//! * [`problems`] — the two manufactured-solution benchmarks
//! * [`training`] — loss assembly, per-sub-domain sessions, stitching,
//!   error metrics

// Guards written as `!(x > 0.0)` deliberately treat NaN as out of range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod jet;
pub mod lbfgs;
pub mod mlp;
pub mod problems;
pub mod symmetry;
pub mod training;

pub use error::{Error, Result};
pub use jet::{Jet, JetAdjoint};
pub use mlp::{Architecture, ParameterVector};
