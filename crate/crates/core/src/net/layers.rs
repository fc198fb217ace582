use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Architecture, Scalar, POINT_DIM};

/// `y = W x + b` with `W` stored `out × in`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer<F> {
    pub weight: Array2<F>,
    pub bias: Array1<F>,
}

impl<F: Scalar> DenseLayer<F> {
    pub fn zeros(input: usize, output: usize) -> Self {
        DenseLayer {
            weight: Array2::zeros((output, input)),
            bias: Array1::zeros(output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.nrows()
    }

    /// Row-wise affine map of an `n × in` batch.
    pub fn forward(&self, x: ArrayView2<F>) -> Array2<F> {
        let mut z = x.dot(&self.weight.t());
        z += &self.bias;
        z
    }

    /// Adds `dz^T x` and the column sums of `dz` into this layer's slots.
    pub(crate) fn accumulate(&mut self, dz: ArrayView2<F>, x: ArrayView2<F>) {
        ndarray::linalg::general_mat_mul(F::one(), &dz.t(), &x, F::one(), &mut self.weight);
        self.bias += &dz.sum_axis(Axis(0));
    }

    pub fn cast<G: Scalar>(&self) -> DenseLayer<G> {
        let c = |x: &F| G::from_f64(x.to_f64().unwrap()).unwrap();
        DenseLayer {
            weight: self.weight.map(c),
            bias: self.bias.map(c),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weight.iter().chain(self.bias.iter()).all(|x| x.is_finite())
    }

    fn scaled_add(&mut self, k: F, other: &DenseLayer<F>) {
        self.weight.scaled_add(k, &other.weight);
        self.bias.scaled_add(k, &other.bias);
    }

    fn scale(&mut self, k: F) {
        self.weight.mapv_inplace(|x| x * k);
        self.bias.mapv_inplace(|x| x * k);
    }
}

/// Shared per-point MLP followed by max-pool and one dense layer.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderWeights<F> {
    pub shared_mlp: Vec<DenseLayer<F>>,
    pub post_pool: DenseLayer<F>,
}

/// Pointwise MLP on `[q_i, θ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorWeights<F> {
    pub layers: Vec<DenseLayer<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkWeights<F> {
    pub encoder: EncoderWeights<F>,
    pub generator: GeneratorWeights<F>,
}

impl<F: Scalar> NetworkWeights<F> {
    pub fn zeros(arch: &Architecture) -> Self {
        let mut shared = Vec::new();
        let mut width = POINT_DIM;
        for &w in &arch.encoder_widths {
            shared.push(DenseLayer::zeros(width, w));
            width = w;
        }
        let post_pool = DenseLayer::zeros(width, arch.latent_width);
        let mut layers = Vec::new();
        let mut width = arch.generator_input();
        for &w in &arch.generator_widths {
            layers.push(DenseLayer::zeros(width, w));
            width = w;
        }
        layers.push(DenseLayer::zeros(width, 3));
        NetworkWeights {
            encoder: EncoderWeights {
                shared_mlp: shared,
                post_pool,
            },
            generator: GeneratorWeights { layers },
        }
    }

    pub fn zeros_like(&self) -> Self {
        NetworkWeights::zeros(&self.architecture())
    }

    /// Architecture implied by the stored shapes.
    pub fn architecture(&self) -> Architecture {
        let gen = &self.generator.layers;
        Architecture {
            encoder_widths: self.encoder.shared_mlp.iter().map(|l| l.output_dim()).collect(),
            latent_width: self.encoder.post_pool.output_dim(),
            generator_widths: gen[..gen.len() - 1].iter().map(|l| l.output_dim()).collect(),
        }
    }

    /// Layers in a fixed order with stable names.
    pub fn named_layers(&self) -> Vec<(String, &DenseLayer<F>)> {
        let mut out: Vec<(String, &DenseLayer<F>)> = self
            .encoder
            .shared_mlp
            .iter()
            .enumerate()
            .map(|(i, l)| (format!("encoder.mlp.{i}"), l))
            .collect();
        out.push(("encoder.post_pool".into(), &self.encoder.post_pool));
        out.extend(
            self.generator
                .layers
                .iter()
                .enumerate()
                .map(|(i, l)| (format!("generator.{i}"), l)),
        );
        out
    }

    pub fn layers_mut(&mut self) -> Vec<&mut DenseLayer<F>> {
        let mut out: Vec<&mut DenseLayer<F>> = self.encoder.shared_mlp.iter_mut().collect();
        out.push(&mut self.encoder.post_pool);
        out.extend(self.generator.layers.iter_mut());
        out
    }

    pub fn layers(&self) -> Vec<&DenseLayer<F>> {
        self.named_layers().into_iter().map(|(_, l)| l).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn cast<G: Scalar>(&self) -> NetworkWeights<G> {
        NetworkWeights {
            encoder: EncoderWeights {
                shared_mlp: self.encoder.shared_mlp.iter().map(|l| l.cast()).collect(),
                post_pool: self.encoder.post_pool.cast(),
            },
            generator: GeneratorWeights {
                layers: self.generator.layers.iter().map(|l| l.cast()).collect(),
            },
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers().iter().all(|l| l.is_finite())
    }

    /// `self += k · other`.
    pub fn scaled_add(&mut self, k: F, other: &NetworkWeights<F>) {
        for (a, b) in self.layers_mut().into_iter().zip(other.layers()) {
            a.scaled_add(k, b);
        }
    }

    pub fn scale(&mut self, k: F) {
        for l in self.layers_mut() {
            l.scale(k);
        }
    }

    pub fn max_abs(&self) -> F {
        self.layers()
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
            .fold(F::zero(), |m, x| m.max(x.abs()))
    }
}

/// Uniform `(-1/√fan_in, 1/√fan_in)` initialization of every weight and bias.
pub fn init_weights(rng_seed: u64, arch: &Architecture) -> NetworkWeights<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut w = NetworkWeights::<f32>::zeros(arch);
    for layer in w.layers_mut() {
        let bound = (1.0 / layer.input_dim() as f64).sqrt() as f32;
        let dist = Uniform::new_inclusive(-bound, bound);
        layer.weight.mapv_inplace(|_| dist.sample(&mut rng));
        layer.bias.mapv_inplace(|_| dist.sample(&mut rng));
    }
    w
}
