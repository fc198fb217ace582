//! Reconstruction metrics, geodesic correspondence curves and a robustness
//! sweep, with hand-made "reconstructions" so no training is needed.
//!
//! ```text
//! cargo run --release --example evaluation
//! ```

use partwhole::eval::{
    evaluate_reconstruction, geodesic_error_curve, robustness_csv, run_robustness_suite, summarize, Suite,
    METRIC_COLUMNS,
};
use partwhole::geometry::{Correspondence, Vector3};
use partwhole::net::{init_weights, Architecture};
use partwhole::synthdata::shapes::icosphere;
use partwhole::synthdata::{Dataset, DatasetConfig, Split};

fn main() -> partwhole::Result<()> {
    let gt = icosphere(2);
    let records = [0.0, 0.01, 0.05]
        .iter()
        .map(|&dx| evaluate_reconstruction(&gt.translated(&Vector3::new(dx, 0.0, 0.0)), &gt, format!("shift {dx}")))
        .collect::<partwhole::Result<Vec<_>>>()?;
    println!("sample_id,{}", METRIC_COLUMNS.join(","));
    for r in &records {
        println!("{},{}", r.sample_id, r.values().map(|v| format!("{v:.4}")).join(","));
    }
    let (mean, std) = summarize(&records);
    println!("mean,{}\nstd,{}", mean.map(|v| format!("{v:.4}")).join(","), std.map(|v| format!("{v:.4}")).join(","));

    // A map that is off by one index everywhere, against the identity.
    let n = gt.vertex_count();
    let pred = Correspondence::new((0..n).map(|i| (i + 1) % n).collect(), n)?;
    let curve = geodesic_error_curve(&pred, &Correspondence::identity(n), &gt, &[0.0, 0.1, 0.2, 0.4, 0.8])?;
    print!("geodesic curve:\n{}", curve.to_csv());

    let data = Dataset::generate(&DatasetConfig {
        train_subjects: 1,
        val_subjects: 0,
        test_subjects: 1,
        poses_per_subject: 2,
        views: 2,
        seed: 0,
    });
    let test = data.evaluation_set(Split::Test, 1)?;
    let weights = init_weights(0, &Architecture::default());
    let rows = run_robustness_suite(&weights, &test, None, Suite::Downsample, data.centimeter(), 0)?;
    print!("robustness (untrained network):\n{}", robustness_csv(&rows));
    Ok(())
}
