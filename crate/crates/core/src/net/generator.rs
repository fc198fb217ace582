use ndarray::{s, Array1, Array2, Axis};

use super::layers::GeneratorWeights;
use super::{Scalar, POINT_DIM};

#[derive(Clone, Debug)]
pub struct GeneratorTrace<F> {
    pub(crate) input: Array2<F>,
    pub(crate) theta: Array1<F>,
    /// Output of each layer after its activation; the last one is the
    /// `tanh` output.
    pub(crate) activations: Vec<Array2<F>>,
}

impl<F: Scalar> GeneratorTrace<F> {
    pub fn output(&self) -> &Array2<F> {
        self.activations.last().unwrap()
    }
}

pub(crate) fn generate_traced<F: Scalar>(q: &Array2<F>, theta: &Array1<F>, w: &GeneratorWeights<F>) -> GeneratorTrace<F> {
    let first = &w.layers[0];
    assert_eq!(q.ncols(), POINT_DIM);
    assert_eq!(first.input_dim(), POINT_DIM + theta.len(), "code width does not match the generator");
    // The code part of the first layer is shared by every point.
    let w_point = first.weight.slice(s![.., ..POINT_DIM]);
    let w_code = first.weight.slice(s![.., POINT_DIM..]);
    let shared = w_code.dot(theta) + &first.bias;
    let mut z = q.dot(&w_point.t());
    z += &shared;
    let last = w.layers.len() - 1;
    let mut activations = Vec::with_capacity(w.layers.len());
    for (l, layer) in w.layers.iter().enumerate() {
        if l > 0 {
            z = layer.forward(activations.last().map(|a: &Array2<F>| a.view()).unwrap());
        }
        if l == last {
            z.mapv_inplace(|x| x.tanh());
        } else {
            z.mapv_inplace(|x| if x > F::zero() { x } else { F::zero() });
        }
        activations.push(z.clone());
    }
    GeneratorTrace {
        input: q.clone(),
        theta: theta.clone(),
        activations,
    }
}

/// Maps every row `q_i` of an `n × 6` array, together with the code `θ`, to a
/// position in `(-1, 1)^3`.
pub fn generate<F: Scalar>(q: &Array2<F>, theta: &Array1<F>, w: &GeneratorWeights<F>) -> Array2<F> {
    generate_traced(q, theta, w).activations.pop().unwrap()
}

/// Backpropagates `d_out` (gradient w.r.t. the `n × 3` output) into `grad`
/// and returns the gradient w.r.t. `θ`.
pub(crate) fn generator_backward<F: Scalar>(
    trace: &GeneratorTrace<F>,
    w: &GeneratorWeights<F>,
    d_out: &Array2<F>,
    grad: &mut GeneratorWeights<F>,
) -> Array1<F> {
    let last = w.layers.len() - 1;
    let mut dz = d_out.clone();
    ndarray::Zip::from(&mut dz)
        .and(&trace.activations[last])
        .for_each(|d, &y| *d = *d * (F::one() - y * y));
    for l in (1..=last).rev() {
        grad.layers[l].accumulate(dz.view(), trace.activations[l - 1].view());
        let mut da = dz.dot(&w.layers[l].weight);
        ndarray::Zip::from(&mut da)
            .and(&trace.activations[l - 1])
            .for_each(|d, &a| {
                if a <= F::zero() {
                    *d = F::zero();
                }
            });
        dz = da;
    }
    let g0 = &mut grad.layers[0];
    let col_sum = dz.sum_axis(Axis(0));
    ndarray::linalg::general_mat_mul(
        F::one(),
        &dz.t(),
        &trace.input,
        F::one(),
        &mut g0.weight.slice_mut(s![.., ..POINT_DIM]),
    );
    let mut g_code = g0.weight.slice_mut(s![.., POINT_DIM..]);
    for (o, &g) in col_sum.iter().enumerate() {
        g_code.row_mut(o).scaled_add(g, &trace.theta);
    }
    g0.bias += &col_sum;
    w.layers[0].weight.slice(s![.., POINT_DIM..]).t().dot(&col_sum)
}
