//! Augmented Lagrangian methods for composite optimization, with the
//! second-order variational diagnostics needed to study their convergence
//! rates at desk scale.
//!
//! The problem class is
//!
//! ```text
//!     minimize  phi(x) + g(Phi(x))   subject to  x in Theta,
//! ```
//!
//! where `phi` and `Phi` are twice differentiable, `g` is a proper lsc convex
//! function drawn from a fixed catalog (orthant/box/polyhedron indicators,
//! weighted l1, convex piecewise linear-quadratic, second-order cone, PSD
//! cone), and `Theta` is a polyhedron. The crate provides:
//!
//! - dense polyhedral geometry kernels (projection, normal-cone distances,
//!   tangent/critical cones, LP/NNLS/QP) in [`geometry`];
//! - exact proximal mappings, Moreau envelopes, subdifferential tests and
//!   second-subderivative oracles for the convex catalog in [`convex`];
//! - the augmented Lagrangian, its partial gradients, the multiplier update
//!   and the KKT residual in [`auglag`];
//! - an inexact augmented Lagrangian driver with a locality safeguard and
//!   convergence-rate estimation in [`solver`] and [`rates`];
//! - difference-quotient estimators for (semi-strict) second subderivatives,
//!   SOSC/quadratic-growth/error-bound checks in [`diagnostics`];
//! - a small problem catalog with known solutions in [`catalog`], and a
//!   diff-able trace format plus JSON reports in [`trace`].
//!
//! Everything is deterministic for a fixed seed and safe to use from multiple
//! threads; all state is immutable after construction.

pub mod auglag;
pub mod catalog;
pub mod convex;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod model;
pub mod rates;
pub mod solver;
pub mod trace;

pub use error::AlmError;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, AlmError>;
