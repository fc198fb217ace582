//! One forward and backward pass of the Siamese encoder and pointwise
//! generator on a synthetic triplet.
//!
//! ```text
//! cargo run --release --example network
//! ```

use partwhole::net::{forward, forward_backward, init_weights, Architecture, NormalGradient, PreparedSample};
use partwhole::synthdata::{Dataset, DatasetConfig, Split};

fn main() -> partwhole::Result<()> {
    let data = Dataset::generate(&DatasetConfig {
        train_subjects: 1,
        val_subjects: 0,
        test_subjects: 0,
        poses_per_subject: 2,
        views: 1,
        seed: 0,
    });
    let triplet = &data.evaluation_set(Split::Train, 1)?[0];
    let arch = Architecture::default();
    let weights = init_weights(0, &arch);
    println!(
        "encoder widths {:?}, generator widths {:?}, {} parameters",
        arch.encoder_widths,
        arch.generator_widths,
        weights.parameter_count()
    );

    let sample = PreparedSample::<f32>::from_triplet(triplet, None)?;
    let state = forward(&weights, &sample.part, &sample.full);
    let code = state.latent();
    println!(
        "|P| = {}, |Q| = {}, code width {} (part max {:.4}, whole max {:.4})",
        sample.part.nrows(),
        sample.full.nrows(),
        code.width(),
        code.part().iter().cloned().fold(0.0f32, f32::max),
        code.whole().iter().cloned().fold(0.0f32, f32::max)
    );
    println!("output {} x {}", state.output().nrows(), state.output().ncols());

    let (loss, grad) = forward_backward(&weights, &sample, 0.1, NormalGradient::Differentiable)?;
    println!("loss {loss:.4}, largest gradient entry {:.3e}", grad.max_abs());
    Ok(())
}
