//! Large-deviation rate functions for diffusion through a square lattice of
//! impermeable circular obstacles.
pub mod dense;
pub mod dispersion;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod roots;
pub mod sparse;
pub mod transforms;

pub use error::{Error, Result};
