//! Blended quasicontinuum models of a periodic chain with first and second
//! neighbour pair interactions.
//!
//! The crate is organised bottom-up: [`lattice`] (deformations and discrete
//! norms), [`potential`], [`blend`] (blending shapes and weights),
//! [`energy`] (the blended energy family), [`stability`] (coercivity and
//! critical strains), [`solve`] (equilibria under dead loads) and
//! [`experiments`] (audits, sweeps and rate fits).

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blend;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod linalg;
pub mod potential;
pub mod sampling;
pub mod solve;
pub mod stability;
pub mod table;

pub use blend::{BlendFunction, BlendShape};
pub use energy::{EnergyModel, ModelKind};
pub use error::{BqcError, Result};
pub use lattice::{Deformation, Displacement, DualFunctional, LatticeConfig};
pub use potential::Potential;
