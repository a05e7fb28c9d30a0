//! Sub-Riemannian geodesic flow on contact 3-manifolds.
//!
//! Models are given by an oriented orthonormal frame (X, Y) of the contact distribution; from it
//! the crate derives the Reeb field, integrates the normal geodesic flow of g*/2, compares high
//! momentum geodesics with the spiral around a Reeb orbit, measures parallel-transport monodromy,
//! shoots for closed geodesics near the predicted lengths, and carries the homogeneous polynomial
//! calculus in (u, v).
#![cfg_attr(not(test), no_std)]
// NaN must fail range checks, so `!(x > 0.0)` is intentional throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod fit;
pub mod jet;
pub mod math;
pub mod models;
pub mod ode;
pub mod periodic;
pub mod polyalg;
pub mod reeb;
pub mod spiral;
pub mod symplectic;

pub use error::{Error, Result};
