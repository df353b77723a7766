//! Numerical laboratory for the scalar wave equation on Kerr exteriors.
//!
//! The crate is organised bottom-up: closed-form background geometry,
//! null geodesics and the photon-orbit band, discrete symmetry operators,
//! the mode-decomposed evolution, energy and Morawetz diagnostics, the
//! explicit Hardy-estimate construction and decay-rate fitting.

pub mod commutator;
pub mod decay;
pub mod energy;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod geodesics;
pub mod geometry;
pub mod hardy;
pub mod morawetz;
pub mod quadrature;
pub mod rational;
pub mod special;
pub mod symmetry;

pub use error::{KerrError, Result};
pub use exec::ExecPolicy;
pub use geometry::{KerrParams, RadialMap};
