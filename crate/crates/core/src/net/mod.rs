//! The learning core: a Siamese point encoder, a pointwise generator, the
//! reconstruction loss, hand-written backpropagation and Adam.
//!
//! Everything is generic over [`Scalar`] so the same code runs in `f32` for
//! training and in `f64` for gradient checking.

mod adam;
mod encoder;
mod generator;
mod layers;
mod loss;
mod model;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use encoder::{encode_shape, EncoderTrace};
pub use generator::{generate, GeneratorTrace};
pub use layers::{init_weights, DenseLayer, EncoderWeights, GeneratorWeights, NetworkWeights};
pub use loss::{loss, loss_and_grad, predicted_normals, NormalGradient};
pub use model::{
    accumulate_gradient, encode_pair, forward, forward_backward, points6d, target6d, ForwardState, LatentCode, PreparedSample,
};

/// Per-point input features: position and unit normal.
pub const POINT_DIM: usize = 6;

/// Floating-point types the network runs in.
pub trait Scalar:
    ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssignOps
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn cast<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("representable")
}

/// Layer widths of the encoder and generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    /// Hidden widths of the shared per-point MLP.
    pub encoder_widths: Vec<usize>,
    /// Width of each single-shape code (post-pool layer output).
    pub latent_width: usize,
    /// Hidden widths of the generator; its input is `POINT_DIM + 2·latent`
    /// and its output is 3.
    pub generator_widths: Vec<usize>,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            encoder_widths: vec![64, 128, 1024],
            latent_width: 1024,
            generator_widths: vec![1024, 512, 256, 128, 128, 128, 128],
        }
    }
}

impl Architecture {
    pub fn generator_input(&self) -> usize {
        POINT_DIM + 2 * self.latent_width
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.encoder_widths.is_empty() || self.generator_widths.is_empty() {
            return Err(crate::Error::invalid("network needs at least one hidden layer per part"));
        }
        if self.encoder_widths.iter().chain(&self.generator_widths).any(|&w| w == 0) || self.latent_width == 0 {
            return Err(crate::Error::invalid("layer widths must be positive"));
        }
        if *self.encoder_widths.last().unwrap() != self.latent_width {
            return Err(crate::Error::invalid(
                "the post-pool layer maps the last encoder width to itself; latent width must equal it",
            ));
        }
        Ok(())
    }
}
