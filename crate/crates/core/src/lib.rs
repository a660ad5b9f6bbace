pub mod analytic;
pub mod elasticity;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod micromech;
pub mod props;
pub mod stl;
pub mod stokes;
pub mod study;
pub mod transport;
pub mod uq;
pub mod voxel;

pub use error::{Error, Result};
