//! Galerkin boundary elements for the electric field integral equation on
//! multipatch NURBS surfaces, with spline and Raviart–Thomas current spaces
//! assembled through a shared element-local superspace.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod field;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod spaces;
pub mod solver;
pub mod sparse;
pub mod splines;

pub use error::{Error, Result};

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod testing;
