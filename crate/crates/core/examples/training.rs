//! A short training run with checkpoints, then a resume that continues it.
//!
//! ```text
//! cargo run --release --example training -- [out_dir]
//! ```

use std::path::PathBuf;

use partwhole::synthdata::{Dataset, DatasetConfig};
use partwhole::train::{train_loop, Checkpoint, TrainConfig, TrainOutputs, Trainer};

fn main() -> partwhole::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "training_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| partwhole::Error::io(&out, e))?;
    let data = Dataset::generate(&DatasetConfig {
        train_subjects: 2,
        val_subjects: 1,
        test_subjects: 0,
        poses_per_subject: 6,
        views: 4,
        seed: 0,
    });
    let config = TrainConfig::parse(
        "epochs = 2\ntriplets_per_epoch = 40\nbatch_size = 4\nval_triplets = 8\nlr = 0.003\n",
        "inline",
    )?;
    println!("config:\n{}", config.to_text());

    let outputs = TrainOutputs::beside(&out.join("model.ckpt"));
    let mut trainer = Trainer::new(config)?;
    train_loop(&mut trainer, &data, Some(&outputs), |e| {
        println!("epoch {}: train {:.3}, val {:.3}", e.epoch, e.train_loss, e.val_loss)
    })?;

    // Pick the run up again from disk and train one more epoch.
    let mut ck = Checkpoint::load(&outputs.checkpoint)?;
    println!("loaded checkpoint at epoch {} ({} Adam steps)", ck.epoch, ck.adam.t);
    ck.config.epochs = 3;
    let mut resumed = Trainer::from_checkpoint(ck)?;
    train_loop(&mut resumed, &data, Some(&outputs), |e| {
        println!("epoch {}: train {:.3}, val {:.3}", e.epoch, e.train_loss, e.val_loss)
    })?;
    println!("log:\n{}", std::fs::read_to_string(&outputs.log).map_err(|e| partwhole::Error::io(&outputs.log, e))?);
    Ok(())
}
