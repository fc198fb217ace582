//! Single-view partial scans and the corruption models used to stress them.

mod corruption;
mod visibility;

pub use corruption::{add_gaussian_noise, downsample_random};
pub use visibility::{equally_spaced_views, project_visible, ViewSpec, DEFAULT_RESOLUTION};
