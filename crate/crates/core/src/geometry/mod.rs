//! Point clouds, triangle meshes and the geometric primitives the rest of the
//! crate is built on. Everything here runs in `f64`.

pub(crate) mod geodesic;
mod kdtree;
mod normals;
mod transform;
mod types;
mod volume;

pub use geodesic::{edge_graph, geodesic_distances, is_connected};
pub use kdtree::KdTree;
pub use normals::{estimate_normals, vertex_normals, vertex_normals_flagged, FALLBACK_NORMAL};
pub use transform::{apply_transform, RigidTransform};
pub use types::{
    center_at_origin, nearest_neighbors, Correspondence, Point3, PointCloud, TriMesh, Vector3,
};
pub use volume::{mesh_volume, surface_area};
