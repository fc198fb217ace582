//! Builds a small synthetic dataset, writes it in the on-disk layout the CLI
//! uses, reads it back and draws a training triplet.
//!
//! ```text
//! cargo run --release --example dataset -- [out_dir]
//! ```

use std::path::PathBuf;

use partwhole::formats::manifest::{read_dataset, read_triplets, write_dataset};
use partwhole::synthdata::{sample_triplet, DatasetConfig, Split};

fn main() -> partwhole::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "dataset_out".into()));
    let config = DatasetConfig {
        train_subjects: 2,
        val_subjects: 1,
        test_subjects: 1,
        poses_per_subject: 4,
        views: 3,
        seed: 0,
    };
    std::fs::create_dir_all(&out).map_err(|e| partwhole::Error::io(&out, e))?;
    let (manifest, dataset) = write_dataset(&out, &config)?;
    println!(
        "{} subjects, {} stored triplets, template has {} vertices, 1 cm = {:.4} units",
        manifest.subjects.len(),
        manifest.triplets.len(),
        dataset.subjects[0].template.vertex_count(),
        dataset.centimeter()
    );

    let (manifest, dataset) = read_dataset(&out)?;
    let test = read_triplets(&out, &manifest, &dataset, Split::Test)?;
    for (id, t) in test.iter().take(3) {
        println!("{id}: |P| = {}, Q pose {}, R pose {}", t.part.len(), t.pose_q, t.pose_r);
    }

    let t = sample_triplet(&dataset, 42, Split::Train)?;
    println!(
        "random training triplet: subject {}, poses {} -> {}, azimuth {:.1} deg, {} visible points",
        t.subject_id,
        t.pose_q,
        t.pose_r,
        t.azimuth.to_degrees(),
        t.part.len()
    );
    Ok(())
}
