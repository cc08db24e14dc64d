//! Per-mode spectral solver for the massive Dirac field on the covering
//! anti-de Sitter spacetime, with boundary-condition families, unitary
//! evolution and the scalar Klein–Gordon comparison problem.

pub mod angular;
pub mod bf_scalar;
pub mod boundary;
pub mod error;
pub mod evolution;
pub mod galerkin;
pub mod gamma_geometry;
pub mod jacobi;
pub mod quadrature;
pub mod radial;
pub mod spectrum;

pub use error::{Error, Result};
