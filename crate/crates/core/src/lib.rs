//! Dual-reciprocity boundary element solver for transient and time-harmonic
//! heat conduction in a bonded bilayer box with ellipsoidal inhomogeneities.
//!
//! The math layer (`jet`, `kernels`, `potentials`, `eshelby`, `drm` radial
//! functions) is generic over [`Scalar`]; meshes, assembly and solves work in
//! `f64`.

pub mod bem;
pub mod cli;
pub mod config;
pub mod drm;
pub mod eim;
pub mod error;
pub mod eshelby;
pub mod jet;
pub mod kernels;
pub mod model;
pub mod multi_index;
pub mod postprocess;
pub mod potentials;
pub mod quadrature;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::{Scalar, Vec3};

/// Concrete aliases used by the assembly and solver layers.
pub type Point = Vec3<f64>;
pub type Bimaterial = kernels::Bimaterial<f64>;
pub type Ellipsoid = potentials::Ellipsoid<f64>;
