//! Surfaces and voxel masks: contour-stack triangulation, voxelization,
//! morphology, mask algebra and exact Euclidean distance maps.

mod edt;
mod mask;
mod mesh;
mod voxelize;

pub use edt::{distance_map, squared_distance_map};
pub use mask::{dilate, subtract, BinaryMask};
pub use mesh::{triangulate, TriMesh};
pub use voxelize::voxelize;
