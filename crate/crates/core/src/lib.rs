//! Poly-harmonic extension operators on the upper half-space and the unit
//! ball, the conformal map between them, and numerical checks of the sharp
//! integral inequalities they satisfy.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, reports and parallel sweeps live in the
//! `confext` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod field;
pub mod geometry;
pub mod inequalities;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod rearrangement;
pub mod special;

pub use error::{Error, Result};
pub use field::{Domain, FieldFunction};
pub use kernels::KernelParams;
