//! Geodesic (in)completeness of left-invariant Lorentzian metrics on
//! three-dimensional Lie algebras.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod metric;
pub mod normal_form;
pub mod problem;
pub mod report;

pub use error::{Error, Result};
