// negated comparisons below are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical laboratory for decay rates of the Navier-Stokes-Voigt equations.
//!
//! * [`spectral`]: periodic-box fields, transforms, projection, norms.
//! * [`decay`]: initial data of prescribed decay character and r* estimation.
//! * [`linear`]: exact linear evolution and continuum norm series.
//! * [`solver`]: pseudo-spectral RK4 integrator for the nonlinear system.
//! * [`verify`]: predicted exponents and verification verdicts.
//! * [`cli`]: the `nsv` command.

pub mod cli;
pub mod config;
pub mod decay;
pub mod error;
pub mod fit;
pub mod linear;
pub mod manifest;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{NsvError, Result};
