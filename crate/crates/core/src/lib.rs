//! Finite element θ-schemes for the viscous Burgers equation stabilized by
//! nonlinear Neumann boundary feedback, in 1D and on the unit square.

pub mod assembly;
pub mod cli;
pub mod config;
pub mod convergence;
pub mod diagnostics;
pub mod error;
pub mod mesh;
pub mod models;
pub mod sparse;
pub mod stepper;

pub use error::{Error, Result};
