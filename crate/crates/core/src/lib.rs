//! Numerical laboratory for the chord shortening flow: the negative
//! gradient flow of chord length for endpoint pairs on a submanifold of ℝⁿ.

// `!(x > 0.0)` is used on purpose so NaN is rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod census;
pub mod chord;
mod error;
pub mod expr;
pub mod flow;
pub mod manifold;
pub mod verify;

pub use error::{Error, Result};
