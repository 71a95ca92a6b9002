#![no_std]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]
//! Numerics for randomized central limit theorems: weighted sums ⟨X,θ⟩ of an
//! orthonormal system X with coefficients θ drawn uniformly from the unit
//! sphere, compared against the typical distribution and the standard normal
//! law in the Kolmogorov, L² and Kantorovich distances.
//!
//! The crate is `no_std` with `alloc`. Parallel execution, file formats and
//! the command-line interface live in the companion `randclt` crate.

extern crate alloc;

pub mod distance;
pub mod error;
pub mod expansions;
pub mod moments;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod sphere;
pub mod systems;

pub use error::{Error, Result};
