//! Imaginary-time propagator of the quartic anharmonic oscillator.

pub mod algebra;
pub mod cli;
pub mod continuum;
pub mod correction;
pub mod error;
pub mod quad;
pub mod lattice;
pub mod matrixrec;
pub mod specfun;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
pub use specfun::{PcfIndex, TruncationPolicy};
