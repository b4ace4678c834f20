//! Incompressible Euler flow on the flat 2-torus: spectral calculus, a
//! pseudo-spectral vorticity solver, Lagrangian flow maps and the exponential
//! map, plus the machinery for probing non-smooth dependence of the solution
//! map on initial data.

pub mod builtin;
pub mod construction;
pub mod error;
pub mod experiments;
pub mod lagrangian;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Grid, ScalarField, SobolevIndex, Spectrum, VectorField};
