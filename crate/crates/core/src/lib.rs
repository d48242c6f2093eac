//! Numerical laboratory for free-energy fluctuations of mixed p-spin glasses.
//!
//! The crate is organised by the objects it computes:
//!
//! * [`theory`]: closed-form limit quantities (limiting variance, cycle-count
//!   weights, second moment of the normalised partition function, the
//!   high-temperature threshold `beta_xi`, truncation bounds).
//! * [`model`]: disorder sampling (GOE matrix, Gaussian coupling tensors,
//!   mean-shifted GOE) and Hamiltonian evaluation.
//! * [`partition`]: exact free energies by Gray-code enumeration of `{±1}^N`
//!   and exact Gibbs sampling.
//! * [`cycles`]: centred weighted cycle counts by canonical enumeration and by
//!   Möbius inversion on the set-partition lattice.
//! * [`wick`]: exact rational moments of polynomials in the GOE entries.
//! * [`harness`]: replica-parallel experiments, statistical tests and the
//!   acceptance criteria.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cycles;
pub mod error;
pub mod harness;
pub mod model;
pub mod partition;
pub mod theory;
pub mod wick;

pub use error::{Error, Result};
