//! Geometry primitives: voxel grids, landmark meshes, contours, transforms.

mod contour;
mod mask;
mod pointset;
mod transform;
mod volume;

pub use contour::{polygon_area, polygon_area_of, Contour};
pub use mask::{LabelMask, RegionLabel};
pub use pointset::{MeshTopology, PointSet, StructureLabel, SurfaceGrid};
pub use transform::{
    apply_transform, fit_similarity, fit_similarity_points, SimilarityFit, SimilarityTransform,
};
pub use volume::{View, VoxelVolume};
