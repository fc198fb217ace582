//! Synthetic articulated subjects standing in for scanned humans.
//!
//! Every subject shares one template topology, so any two poses of a subject
//! are in exact vertex-to-vertex correspondence and the ground-truth map
//! between `Q` and `R` is the identity on vertex indices.

mod body;
mod dataset;
pub mod shapes;
mod skeleton;

pub use body::{build_subject, Limb, SubjectModel, SubjectParams, TEMPLATE_RADIUS};
pub use dataset::{sample_triplet, Dataset, DatasetConfig, Split, SubjectShapes, Triplet};
pub use skeleton::{pose_shape, skin, Bone, PoseParams, Skeleton, SkinWeight, JOINT_LIMIT};
