//! Autonomous quantum thermodynamics on dense multipartite operators.
//!
//! The crate models a heat bath, a principal system, a memory and a work
//! source evolving under one time-independent Hamiltonian. It checks the
//! Hamiltonian structure that makes the work source act as an
//! entropy-preserving catalyst, evaluates heat/work/entropy ledgers with the
//! first- and second-law identities, and computes thermodynamic quantum speed
//! limits from time-averaged Schatten norms.
//!
//! Layer order, bottom to top: [`tensor`] → [`states`] → [`hamiltonian`] →
//! [`dynamics`] → [`catalysis`], [`thermo`] → [`speed_limits`]. The
//! [`oracles`] module holds closed-form results for the four-qubit example
//! family and is independent of the numerical pipeline.

// `!(x >= lo)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalysis;
pub mod cli;
pub mod dynamics;
mod error;
pub mod hamiltonian;
pub mod oracles;
pub mod output;
pub mod quadrature;
pub mod speed_limits;
pub mod states;
pub mod tensor;
pub mod thermo;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<C64>;
