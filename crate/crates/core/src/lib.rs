//! Numerical laboratory for the quasilinear parabolic-parabolic
//! Keller-Segel system with logistic source
//!
//! ```text
//! u_t = ∇·(D(u)∇u) - χ∇·(u∇v) + μ(u - u²)
//! v_t = Δv - v + u
//! ```
//!
//! on a rectangle with no-flux boundaries, `D(u) = C_D (u + 1)^(m-1)`.
//!
//! * [`model`]: parameters, mesh, fields, state, initial data
//! * [`theory`]: closed-form thresholds and the regime classifier
//! * [`operators`]: finite-volume fluxes and right-hand sides
//! * [`integrator`]: adaptive explicit stepping with blow-up detection
//! * [`diagnostics`]: norms, window integrals, constant estimators
//! * [`harness`]: configuration, sweeps, CSV/PGM output, CLI plumbing

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod model;
pub mod operators;
pub mod theory;

pub use error::{KelsimError, Result};
