//! Workspace representation and the geometric machinery built on it.

mod circle;
mod mesh;
mod region;
mod voronoi;

pub use circle::{min_cover_circle, Circle};
pub use mesh::{delaunay_triangulate, locate_triangle, TriMesh, Triangle};
pub use region::{build_region, CellSet, GridGeometry, Rect, RegionGrid, RegionSpec};
pub use voronoi::{voronoi_labels, Partition};
