//! Numerical laboratory for fractional Sobolev-type multiple-control systems.
//!
//! The crate works with the finite-dimensional system
//!
//! ```text
//! L ᶜD_t^α [M x(t)] + E x(t) = f(t, x(t), B₁u₁(t), …),   x(0) + h(x, B_r u_r) = x₀,
//! ```
//!
//! whose mild solutions are built from the characteristic operators
//! `S_α(t) = M⁻¹E_{α,1}(A t^α)` and `T_α(t) = M⁻¹E_{α,α}(A t^α)` with
//! `A = −L⁻¹EM⁻¹`. Control constraints are finite atom sets; the relaxed
//! problem replaces them by their convex hull and each cost by its lower
//! convex envelope, and chattering controls recover the relaxed optimum as a
//! limit of atom-valued controls.

// Negated comparisons double as NaN rejection in argument guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fractional;
pub mod geometry;
pub mod mild;
pub mod optimizer;
pub mod problem;
pub mod quadrature;
pub mod relaxation;
pub mod sobolev;
pub mod special;

pub use error::{Error, Result};
