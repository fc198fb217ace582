//! Overfits the network to twenty fixed triplets (two pose pairs of one
//! subject, ten views each) and reports loss and vertex error.
//!
//! ```text
//! cargo run --release --example overfit -- [steps] [out.ckpt]
//! ```

use std::path::Path;
use std::time::Instant;

use partwhole::eval::evaluate_triplet;
use partwhole::synthdata::{Dataset, DatasetConfig, Split};
use partwhole::train::{TrainConfig, Trainer};

fn main() -> partwhole::Result<()> {
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let data = Dataset::generate(&DatasetConfig {
        train_subjects: 1,
        val_subjects: 0,
        test_subjects: 0,
        poses_per_subject: 3,
        views: 10,
        seed: 0,
    });
    let set = data.evaluation_set(Split::Train, 2)?;
    let batch = 4;
    let mut trainer = Trainer::new(TrainConfig {
        batch_size: batch,
        lr: 3e-3,
        ..TrainConfig::default()
    })?;
    let prepared = set.iter().map(|t| trainer.prepare(t)).collect::<partwhole::Result<Vec<_>>>()?;
    let initial = trainer.mean_loss(&prepared)?;
    let start = Instant::now();
    for s in 0..steps {
        let b: Vec<_> = (0..batch).map(|i| prepared[(s * batch + i) % prepared.len()].clone()).collect();
        let loss = trainer.step_prepared(&b)?;
        if (s + 1) % 50 == 0 {
            println!("step {:>4}: batch loss {loss:.4} ({:.0} s)", s + 1, start.elapsed().as_secs_f64());
        }
    }
    let last = trainer.mean_loss(&prepared)?;
    let mut rel = 0.0;
    for t in &set {
        let (m, _) = evaluate_triplet(&trainer.weights, t, None, |p| Ok(p.clone()), "")?;
        rel += m.mean_euclidean / t.target.vertices.bbox_diagonal() / set.len() as f64;
    }
    println!(
        "loss {initial:.3} -> {last:.4} ({:.1}% lower); mean vertex error {:.2}% of the bounding-box diagonal",
        100.0 * (1.0 - last / initial),
        100.0 * rel
    );
    if let Some(path) = std::env::args().nth(2) {
        trainer.checkpoint().save(Path::new(&path))?;
        println!("saved {path}");
    }
    Ok(())
}
