//! Nonrigid shape completion from a partial scan and a full reference shape.
//!
//! Given a complete shape `Q` of a subject in one pose and a partial,
//! single-view scan `P` of the same subject in another pose, a Siamese point
//! encoder and a pointwise generator deform `Q` into the full shape underlying
//! `P`. Dense part-to-whole correspondence then falls out of a nearest-neighbor
//! query against the (rigidly aligned) reconstruction.
//!
//! Module map:
//!
//! * [`geometry`]: point clouds, triangle meshes, normals, volume, geodesics,
//!   nearest-neighbor search.
//! * [`partiality`]: single-view visibility and scan corruption models.
//! * [`synthdata`]: articulated synthetic subjects and `(P, Q, R)` triplets.
//! * [`net`]: encoder, generator, loss, manual backpropagation, Adam.
//! * [`train`]: training loop, configuration and checkpoints.
//! * [`pipeline`]: inference, partial ICP and correspondence recovery.
//! * [`eval`]: reconstruction metrics, geodesic error curves, robustness sweeps.
//! * [`formats`]: PLY / OFF / CSV readers and writers.
//! * [`cli`]: the `partwhole` command-line front end.

pub mod cli;
pub mod error;
pub mod eval;
pub mod formats;
pub mod geometry;
pub mod net;
pub mod partiality;
pub mod pipeline;
pub mod synthdata;
pub mod train;

pub use error::{Error, Result};
