//! Boundary discretization and boundary-integral blocks.

pub mod assembly;
pub mod integrate;
pub mod mesh;

pub use integrate::IntegrationOptions;
pub use mesh::{build_box_mesh, interior_interpolation_points, BoundaryMesh, Element};
