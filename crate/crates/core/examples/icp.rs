//! Trimmed ICP: recovers a rigid motion between two samples of a surface,
//! with and without outliers in the target.
//!
//! ```text
//! cargo run --release --example icp
//! ```

use partwhole::geometry::{apply_transform, Point3, PointCloud, RigidTransform, Vector3};
use partwhole::pipeline::{icp_align_traced, IcpConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> partwhole::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // 500 points spread over an ellipsoid shell.
    let source = PointCloud::new(
        (0..500)
            .map(|_| {
                let v = loop {
                    let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    if (0.1..=1.0).contains(&v.norm()) {
                        break v.normalize();
                    }
                };
                Point3::new(0.5 * v.x, 0.3 * v.y, 0.15 * v.z)
            })
            .collect(),
    );
    let truth = RigidTransform::from_axis_angle(&Vector3::new(1.0, 2.0, 0.5), 50f64.to_radians(), Vector3::new(0.1, -0.2, 0.05));
    let target = apply_transform(&source, &truth);

    // Swap 30% of the target for points scattered through a cube.
    let mut scattered = target.positions.clone();
    for k in 0..150 {
        scattered[k * 500 / 150] = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }

    for (label, target, trim) in [
        ("clean", target, 0.1),
        ("30% outliers", PointCloud::new(scattered), 0.3),
    ] {
        let cfg = IcpConfig {
            max_iters: 200,
            trim_fraction: trim,
            ..IcpConfig::default()
        };
        let result = icp_align_traced(&source, &target, &cfg)?;
        println!(
            "{label}: {} iterations, trimmed RMS {:.3e} -> {:.3e}, rotation error {:.2e}, translation error {:.2e}",
            result.iterations,
            result.rms_history[0],
            result.rms_history.last().unwrap(),
            (result.transform.rotation - truth.rotation).norm(),
            (result.transform.translation - truth.translation).norm()
        );
    }
    Ok(())
}
