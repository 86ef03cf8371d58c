//! Induced vortex tunneling across a toroidal superconducting film, computed
//! from the mode functions of the dual vortex field.
//!
//! - [`device`]: circuit and material relations that fix the drive.
//! - [`pulse`]: the biasing pulse, effective field Ẽ(t) and mass profile.
//! - [`dynamics`]: mode grid, vacuum initialization and RK6 integration.
//! - [`observables`]: regularized current, transport, occupation numbers.
//! - [`cli`]: configuration, run orchestration, fitting and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod observables;
pub mod pulse;

pub use error::{Error, Result};
