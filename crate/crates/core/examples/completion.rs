//! Completes one of the overfit triplets with a checkpoint: reconstruction,
//! rigid alignment onto the scan and part-to-whole correspondence.
//!
//! ```text
//! cargo run --release --example overfit -- 500 model.ckpt
//! cargo run --release --example completion -- model.ckpt [out_dir]
//! ```

use std::path::{Path, PathBuf};

use partwhole::eval::{evaluate_triplet, geodesic_errors};
use partwhole::formats::{correspondence_csv, write_atomic, write_mesh, write_point_cloud};
use partwhole::pipeline::{run, IcpConfig};
use partwhole::synthdata::{Dataset, DatasetConfig, Split};
use partwhole::train::Checkpoint;

fn main() -> partwhole::Result<()> {
    let mut args = std::env::args().skip(1);
    let ckpt = args.next().expect("usage: completion MODEL.ckpt [OUT_DIR]");
    let out = PathBuf::from(args.next().unwrap_or_else(|| "completion_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| partwhole::Error::io(&out, e))?;
    let model = Checkpoint::load(Path::new(&ckpt))?;

    let data = Dataset::generate(&DatasetConfig {
        train_subjects: 1,
        val_subjects: 0,
        test_subjects: 0,
        poses_per_subject: 3,
        views: 10,
        seed: 0,
    });
    let t = &data.evaluation_set(Split::Train, 1)?[3];
    let result = run(&t.part, &t.full, &model.weights, &IcpConfig::default())?;
    let (metrics, _) = evaluate_triplet(&model.weights, t, None, |p| Ok(p.clone()), "sample")?;
    let geo = geodesic_errors(&result.correspondence, &t.part_to_full(), &t.full)?;
    let exact = geo.iter().filter(|&&e| e == 0.0).count();
    println!(
        "|P| = {}, |Q| = {}; ICP rotated {:.2} deg; Euclidean error {:.4}, full Chamfer {:.4}",
        t.part.len(),
        t.full.vertex_count(),
        result.transform.angle().to_degrees(),
        metrics.mean_euclidean,
        metrics.chamfer_full
    );
    println!(
        "correspondence: {exact} of {} points exact, mean normalized geodesic error {:.4}",
        geo.len(),
        geo.iter().sum::<f64>() / geo.len() as f64
    );
    write_point_cloud(&out.join("part.ply"), &t.part)?;
    write_mesh(&out.join("full.ply"), &t.full)?;
    write_mesh(&out.join("reconstruction.ply"), &result.aligned.clone().with_vertex_normals())?;
    write_atomic(&out.join("correspondence.csv"), correspondence_csv(&result.correspondence).as_bytes())?;
    println!("wrote results to {}", out.display());
    Ok(())
}
