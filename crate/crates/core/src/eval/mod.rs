//! Reconstruction and correspondence metrics, and the robustness sweeps.

mod curve;
mod metrics;
mod robustness;

pub use curve::{geodesic_error_curve, geodesic_errors, GeodesicCurve};
pub use metrics::{
    directional_chamfer, evaluate_reconstruction, mean_euclidean_error, mean_squared_euclidean_error, summarize,
    volumetric_error, MetricsRecord, METRIC_COLUMNS,
};
pub use robustness::{
    evaluate_triplet, robustness_csv, run_robustness_suite, RobustnessRow, Suite, DOWNSAMPLE_LEVELS, NOISE_LEVELS_CM,
};
