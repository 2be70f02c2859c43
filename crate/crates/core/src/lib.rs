//! Continuous-Galerkin discretizations of linear hyperbolic problems whose
//! stability comes only from weakly imposed (SBP-SAT) boundary operators.
//!
//! The pipeline is: [`mesh`] → [`dofmap`] → [`assembly`] (M, Q, boundary
//! form) → [`sat`] (boundary operator Π and data G) → [`timeint`] or
//! [`spectra`]. [`problems`] bundles the reference experiments and
//! [`discretization`] wires a problem through the pipeline.

// `!(x > 0.0)` deliberately also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod basis;
pub mod discretization;
pub mod dofmap;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod sat;
pub mod spectra;
pub mod timeint;

pub use error::{Error, Result};
