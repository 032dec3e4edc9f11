//! Bound states of a particle in trapezoidal and square potential wells.
//!
//! The trapezoid is described by the nondimensional triplet `(v1, v2, lambda)`;
//! the ramps are solved with Airy functions and the eigenvalues follow from a
//! bounded, pole-free phase equation. A finite-element oracle, the square-well
//! limit, wavepacket projection and a laboratory for discontinuous candidate
//! eigenfunctions complete the crate.

pub mod airy;
pub mod discontinuity;
pub mod eigenfunction;
pub mod error;
pub mod fdsolver;
pub mod quad;
pub mod spectrum;
pub mod swlimit;
pub mod validate;
pub mod wavepacket;
pub mod well;

pub use error::{Error, Result};
pub use well::{WellSpec, Zone};
