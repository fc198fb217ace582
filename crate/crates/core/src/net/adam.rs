use serde::{Deserialize, Serialize};

use super::layers::NetworkWeights;
use super::{cast, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, shaped like the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<F> {
    pub m: NetworkWeights<F>,
    pub v: NetworkWeights<F>,
    pub t: u64,
}

impl<F: Scalar> AdamState<F> {
    pub fn new(weights: &NetworkWeights<F>) -> Self {
        AdamState {
            m: weights.zeros_like(),
            v: weights.zeros_like(),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step<F: Scalar>(
    weights: &mut NetworkWeights<F>,
    grads: &NetworkWeights<F>,
    state: &mut AdamState<F>,
    cfg: &AdamConfig,
) {
    state.t += 1;
    let t = state.t as i32;
    let b1: F = cast(cfg.beta1);
    let b2: F = cast(cfg.beta2);
    let c1: F = cast(1.0 - cfg.beta1.powi(t));
    let c2: F = cast(1.0 - cfg.beta2.powi(t));
    let lr: F = cast(cfg.lr);
    let eps: F = cast(cfg.eps);
    let one = F::one();
    let params = weights.layers_mut();
    let ms = state.m.layers_mut();
    let vs = state.v.layers_mut();
    let gs = grads.layers();
    for (((w, m), v), g) in params.into_iter().zip(ms).zip(vs).zip(gs) {
        ndarray::Zip::from(&mut w.weight)
            .and(&mut m.weight)
            .and(&mut v.weight)
            .and(&g.weight)
            .for_each(|w, m, v, &g| {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                *w = *w - lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
        ndarray::Zip::from(&mut w.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .and(&g.bias)
            .for_each(|w, m, v, &g| {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                *w = *w - lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{init_weights, Architecture};

    fn tiny() -> Architecture {
        Architecture {
            encoder_widths: vec![2, 3],
            latent_width: 3,
            generator_widths: vec![2],
        }
    }

    #[test]
    fn zero_gradient_leaves_weights_unchanged() {
        let mut w = init_weights(0, &tiny()).cast::<f64>();
        let before = w.clone();
        let mut s = AdamState::new(&w);
        adam_step(&mut w, &before.zeros_like(), &mut s, &AdamConfig::default());
        assert_eq!(w, before);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_about_the_learning_rate() {
        let mut w = NetworkWeights::<f64>::zeros(&tiny());
        let mut g = w.zeros_like();
        g.encoder.post_pool.weight[(0, 0)] = 0.5;
        let mut s = AdamState::new(&w);
        let cfg = AdamConfig::default();
        adam_step(&mut w, &g, &mut s, &cfg);
        // m = 0.05, v = 0.00025; m̂ = 0.5, v̂ = 0.25.
        let expected = -cfg.lr * 0.5 / (0.5 + cfg.eps);
        assert!((w.encoder.post_pool.weight[(0, 0)] - expected).abs() < 1e-15);
        assert!((s.m.encoder.post_pool.weight[(0, 0)] - 0.05).abs() < 1e-15);
        assert!((s.v.encoder.post_pool.weight[(0, 0)] - 0.00025).abs() < 1e-15);
        assert_eq!(w.encoder.post_pool.weight[(0, 1)], 0.0);
    }
}
