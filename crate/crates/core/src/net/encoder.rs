use ndarray::{Array1, Array2, ArrayView2};

use super::layers::EncoderWeights;
use super::Scalar;

/// Intermediate values of one encoder pass, kept for backpropagation.
#[derive(Clone, Debug)]
pub struct EncoderTrace<F> {
    pub(crate) input: Array2<F>,
    /// Post-ReLU output of each shared layer.
    pub(crate) activations: Vec<Array2<F>>,
    /// Per channel, the row that won the max-pool (lowest index on ties).
    pub(crate) argmax: Vec<usize>,
    pub(crate) pooled: Array1<F>,
    pub code: Array1<F>,
}

fn relu<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        x
    } else {
        F::zero()
    }
}

/// Column-wise max with ties resolved to the lowest row.
fn max_pool<F: Scalar>(a: ArrayView2<F>) -> (Array1<F>, Vec<usize>) {
    let channels = a.ncols();
    let mut best = a.row(0).to_owned();
    let mut arg = vec![0; channels];
    for (i, row) in a.outer_iter().enumerate().skip(1) {
        for c in 0..channels {
            if row[c] > best[c] {
                best[c] = row[c];
                arg[c] = i;
            }
        }
    }
    (best, arg)
}

pub(crate) fn encode_traced<F: Scalar>(points: &Array2<F>, w: &EncoderWeights<F>) -> EncoderTrace<F> {
    assert!(points.nrows() > 0, "cannot encode an empty point set");
    let mut activations: Vec<Array2<F>> = Vec::with_capacity(w.shared_mlp.len());
    for layer in &w.shared_mlp {
        let x = activations.last().map(|a| a.view()).unwrap_or(points.view());
        let mut z = layer.forward(x);
        z.mapv_inplace(relu);
        activations.push(z);
    }
    let (pooled, argmax) = max_pool(activations.last().unwrap().view());
    let mut code = w.post_pool.weight.dot(&pooled) + &w.post_pool.bias;
    code.mapv_inplace(relu);
    EncoderTrace {
        input: points.clone(),
        activations,
        argmax,
        pooled,
        code,
    }
}

/// Encodes an `n × 6` point set into a single code vector.
pub fn encode_shape<F: Scalar>(points: &Array2<F>, w: &EncoderWeights<F>) -> Array1<F> {
    encode_traced(points, w).code
}

/// Accumulates into `grad` the gradient of a scalar with respect to the
/// encoder weights, given its gradient `d_code` with respect to the code.
pub(crate) fn encoder_backward<F: Scalar>(
    trace: &EncoderTrace<F>,
    w: &EncoderWeights<F>,
    d_code: &Array1<F>,
    grad: &mut EncoderWeights<F>,
) {
    let d_pre: Array1<F> = d_code
        .iter()
        .zip(&trace.code)
        .map(|(&g, &c)| if c > F::zero() { g } else { F::zero() })
        .collect();
    let gp = &mut grad.post_pool;
    for (o, &g) in d_pre.iter().enumerate() {
        if g != F::zero() {
            gp.weight.row_mut(o).scaled_add(g, &trace.pooled);
        }
    }
    gp.bias += &d_pre;
    let d_pooled = w.post_pool.weight.t().dot(&d_pre);

    // Only the argmax row of each channel receives gradient through the pool.
    let depth = w.shared_mlp.len();
    let last = &trace.activations[depth - 1];
    let below = if depth >= 2 {
        trace.activations[depth - 2].view()
    } else {
        trace.input.view()
    };
    let mut d_below = Array2::<F>::zeros(below.raw_dim());
    let gl = &mut grad.shared_mlp[depth - 1];
    let wl = &w.shared_mlp[depth - 1];
    for (c, (&i, &g)) in trace.argmax.iter().zip(&d_pooled).enumerate() {
        if g == F::zero() || last[(i, c)] <= F::zero() {
            continue;
        }
        gl.weight.row_mut(c).scaled_add(g, &below.row(i));
        gl.bias[c] = gl.bias[c] + g;
        d_below.row_mut(i).scaled_add(g, &wl.weight.row(c));
    }

    let mut d_act = d_below;
    for l in (0..depth - 1).rev() {
        let a = &trace.activations[l];
        let mut dz = d_act;
        ndarray::Zip::from(&mut dz).and(a).for_each(|d, &x| {
            if x <= F::zero() {
                *d = F::zero();
            }
        });
        let x = if l == 0 {
            trace.input.view()
        } else {
            trace.activations[l - 1].view()
        };
        grad.shared_mlp[l].accumulate(dz.view(), x);
        if l > 0 {
            d_act = dz.dot(&w.shared_mlp[l].weight);
        } else {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Axis;
    use crate::net::{init_weights, Architecture};
    use proptest::prelude::*;

    fn small_arch() -> Architecture {
        Architecture {
            encoder_widths: vec![8, 12, 16],
            latent_width: 16,
            generator_widths: vec![10, 6],
        }
    }

    fn points(n: usize, seed: u64) -> Array2<f32> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, 6), |_| rng.gen_range(-1.0..1.0))
    }

    /// Straightforward per-point loop implementation of the same network.
    fn oracle(points: &Array2<f64>, w: &EncoderWeights<f64>) -> Vec<f64> {
        let mut pooled: Option<Vec<f64>> = None;
        for p in points.outer_iter() {
            let mut x: Vec<f64> = p.to_vec();
            for layer in &w.shared_mlp {
                x = (0..layer.output_dim())
                    .map(|o| {
                        let s: f64 = (0..layer.input_dim()).map(|i| layer.weight[(o, i)] * x[i]).sum();
                        (s + layer.bias[o]).max(0.0)
                    })
                    .collect();
            }
            pooled = Some(match pooled {
                None => x,
                Some(m) => m.iter().zip(&x).map(|(a, b)| a.max(*b)).collect(),
            });
        }
        let pooled = pooled.unwrap();
        let l = &w.post_pool;
        (0..l.output_dim())
            .map(|o| {
                let s: f64 = (0..l.input_dim()).map(|i| l.weight[(o, i)] * pooled[i]).sum();
                (s + l.bias[o]).max(0.0)
            })
            .collect()
    }

    #[test]
    fn matches_a_scalar_reimplementation() {
        let w = init_weights(3, &small_arch()).cast::<f64>();
        let p = points(37, 1).mapv(|x| x as f64);
        let code = encode_shape(&p, &w.encoder);
        let expect = oracle(&p, &w.encoder);
        for (a, b) in code.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn pooling_ties_go_to_the_first_row() {
        let a = ndarray::array![[1.0f64, 2.0], [1.0, 3.0], [0.5, 3.0]];
        let (m, arg) = max_pool(a.view());
        assert_eq!(m.to_vec(), vec![1.0, 3.0]);
        assert_eq!(arg, vec![0, 1]);
    }

    #[test]
    fn duplicated_points_do_not_change_the_code() {
        let w = init_weights(5, &small_arch());
        let p = points(20, 2);
        let mut doubled = p.clone();
        doubled.append(Axis(0), p.view()).unwrap();
        assert_eq!(encode_shape(&p, &w.encoder), encode_shape(&doubled, &w.encoder));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn permutation_invariant(seed in 0u64..1000, n in 1usize..60) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let w = init_weights(seed, &small_arch());
            let p = points(n, seed + 7);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = p.select(Axis(0), &order);
            prop_assert_eq!(encode_shape(&p, &w.encoder), encode_shape(&shuffled, &w.encoder));
        }
    }
}
