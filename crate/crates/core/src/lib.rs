//! Computational geometry of Killing vector fields on flat Euclidean space.
//!
//! The crate represents vector fields on `R^n` either exactly, as affine maps
//! `x ↦ A·x + b`, or symbolically, as vectors of parsed expressions. On top of
//! that it provides:
//!
//! - the Killing criterion (a field is Killing for the Euclidean metric iff
//!   its Jacobian is everywhere skew-symmetric), checked exactly for affine
//!   fields and on a sampling grid for expression fields ([`fields`]);
//! - Lie brackets and the bracket-closure of a family of affine Killing
//!   fields into a finite-dimensional Lie algebra ([`lie`]);
//! - exact flow integration through the exponential of the augmented
//!   generator, plus a fixed-step RK4 fallback ([`flow`]);
//! - orbit dimension at a point (evaluation rank of the closure), dimension
//!   stratification over a box, orbit sampling by random flow composition,
//!   and conserved-quantity certificates ([`orbit`]);
//! - a classifier that decides which of seven foliation types the orbits of
//!   a Killing family on `R^3` form, with geometric parameters ([`classify`]);
//! - a scenario suite of end-to-end geometric checks ([`verify`]).

pub mod classify;
pub mod expr;
pub mod fields;
pub mod flow;
pub mod lie;
pub mod linalg;
pub mod orbit;
pub mod verify;

pub use expr::Expression;
pub use fields::{AffineField, ExprField, Field, GridSpec, KillingReport, VectorField};
pub use lie::{FieldFamily, LieAlgebraBasis};
