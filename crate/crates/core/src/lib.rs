//! Scattering resonances of open cavities and their perturbation by small
//! particles.
//!
//! The crate covers the 1D slab and the 2D disk cavity: unperturbed
//! resonances, first-order shift and splitting formulas, polarization
//! tensors of small inclusions, and an independent multipole solver for the
//! cavity-plus-particle system that serves as ground truth.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity2d;
pub mod multipole;
pub mod polarization;
pub mod rootfind;
pub mod slab1d;
pub mod specfun;
pub mod types;

pub use rootfind::{RootResult, RootfindError};
pub use specfun::{BesselKind, CylSeq, CylValue, SpecfunError};
pub use types::{sqrt_near, ComplexBox, Material, Medium, C64, I};
