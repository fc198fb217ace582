use ndarray::{concatenate, s, Array1, Array2, Axis};

use super::encoder::{encode_traced, encoder_backward, EncoderTrace};
use super::generator::{generate_traced, generator_backward, GeneratorTrace};
use super::layers::NetworkWeights;
use super::loss::{loss_and_grad, NormalGradient};
use super::{cast, Scalar, POINT_DIM};
use crate::error::{Error, Result};
use crate::geometry::{vertex_normals, PointCloud, TriMesh};
use crate::synthdata::Triplet;

/// `n × 6` rows of position and normal.
pub fn points6d<F: Scalar>(cloud: &PointCloud) -> Result<Array2<F>> {
    let normals = cloud
        .normals
        .as_ref()
        .ok_or_else(|| Error::invalid("point set has no normals"))?;
    if cloud.is_empty() {
        return Err(Error::invalid("point set is empty"));
    }
    let mut out = Array2::zeros((cloud.len(), POINT_DIM));
    for (i, (p, n)) in cloud.positions.iter().zip(normals).enumerate() {
        for k in 0..3 {
            out[(i, k)] = cast(p[k]);
            out[(i, 3 + k)] = cast(n[k]);
        }
    }
    Ok(out)
}

/// Ground-truth rows for a generator fed with `full`: row `i` is the position
/// and vertex normal of `target` vertex `map[i]`.
pub fn target6d<F: Scalar>(target: &TriMesh, map: &[usize]) -> Result<Array2<F>> {
    let with_normals = PointCloud::with_normals(target.positions().to_vec(), vertex_normals(target))?;
    points6d(&with_normals.select(map))
}

/// `θ = [code(P), code(Q)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentCode<F> {
    pub theta: Array1<F>,
}

impl<F: Scalar> LatentCode<F> {
    pub fn width(&self) -> usize {
        self.theta.len() / 2
    }

    pub fn part(&self) -> ndarray::ArrayView1<'_, F> {
        self.theta.slice(s![..self.width()])
    }

    pub fn whole(&self) -> ndarray::ArrayView1<'_, F> {
        self.theta.slice(s![self.width()..])
    }
}

/// Encodes `P` and `Q` with the shared encoder.
pub fn encode_pair<F: Scalar>(part: &PointCloud, full: &PointCloud, w: &NetworkWeights<F>) -> Result<LatentCode<F>> {
    let p = points6d(part)?;
    let q = points6d(full)?;
    let a = encode_traced(&p, &w.encoder).code;
    let b = encode_traced(&q, &w.encoder).code;
    Ok(LatentCode {
        theta: concatenate![Axis(0), a, b],
    })
}

/// Network-ready arrays for one training triplet.
#[derive(Clone, Debug)]
pub struct PreparedSample<F> {
    pub part: Array2<F>,
    pub full: Array2<F>,
    /// Rows aligned with `full`.
    pub target: Array2<F>,
    /// Connectivity of `full`, used to derive predicted normals.
    pub faces: Vec<[usize; 3]>,
}

impl<F: Scalar> PreparedSample<F> {
    /// Centers `P`, `Q` and `R` and lays them out for the network. With
    /// `full_override`, the given mesh replaces `Q`; it must share `Q`'s
    /// vertex indexing.
    pub fn from_triplet(t: &Triplet, full_override: Option<&TriMesh>) -> Result<Self> {
        let full_mesh = full_override.unwrap_or(&t.full);
        if full_mesh.vertex_count() != t.full.vertex_count() {
            return Err(Error::invalid("replacement template does not share the shape's vertex indexing"));
        }
        let centered = crate::synthdata::Triplet {
            full: full_mesh.clone(),
            ..t.clone()
        }
        .centered();
        let full = centered.full.with_vertex_normals();
        Ok(PreparedSample {
            part: points6d(&centered.part)?,
            full: points6d(&full.vertices)?,
            target: target6d(&centered.target, &t.gt_map.target_indices)?,
            faces: full.faces.clone(),
        })
    }

    pub fn cast<G: Scalar>(&self) -> PreparedSample<G> {
        let c = |a: &Array2<F>| a.mapv(|x| G::from_f64(x.to_f64().unwrap()).unwrap());
        PreparedSample {
            part: c(&self.part),
            full: c(&self.full),
            target: c(&self.target),
            faces: self.faces.clone(),
        }
    }
}

/// Everything the backward pass needs from one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardState<F> {
    pub(crate) part: EncoderTrace<F>,
    pub(crate) full: EncoderTrace<F>,
    pub(crate) generator: GeneratorTrace<F>,
}

impl<F: Scalar> ForwardState<F> {
    pub fn output(&self) -> &Array2<F> {
        self.generator.output()
    }

    pub fn latent(&self) -> LatentCode<F> {
        LatentCode {
            theta: self.generator.theta.clone(),
        }
    }

    /// ReLU on/off pattern and pooling winners. Two passes with equal
    /// patterns lie in the same smooth piece of the network, which is what a
    /// finite-difference gradient check needs to know.
    pub fn activation_pattern(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for trace in [&self.part, &self.full] {
            for a in trace.activations.iter() {
                out.extend(a.iter().map(|&x| (x > F::zero()) as u32));
            }
            out.extend(trace.argmax.iter().map(|&i| i as u32));
            out.extend(trace.code.iter().map(|&x| (x > F::zero()) as u32));
        }
        let g = &self.generator.activations;
        for a in &g[..g.len() - 1] {
            out.extend(a.iter().map(|&x| (x > F::zero()) as u32));
        }
        out
    }
}

/// Runs both encoders and the generator on `(P, Q)`.
pub fn forward<F: Scalar>(w: &NetworkWeights<F>, part: &Array2<F>, full: &Array2<F>) -> ForwardState<F> {
    let part = encode_traced(part, &w.encoder);
    let full_trace = encode_traced(full, &w.encoder);
    let theta = concatenate![Axis(0), part.code, full_trace.code];
    let generator = generate_traced(&full_trace.input, &theta, &w.generator);
    ForwardState {
        part,
        full: full_trace,
        generator,
    }
}

/// Adds `scale · ∇L` for one sample into `grad` and returns `L`.
pub fn accumulate_gradient<F: Scalar>(
    w: &NetworkWeights<F>,
    sample: &PreparedSample<F>,
    alpha: F,
    normal_gradient: NormalGradient,
    scale: F,
    grad: &mut NetworkWeights<F>,
) -> Result<F> {
    let state = forward(w, &sample.part, &sample.full);
    let (value, mut d_out) = loss_and_grad(state.output(), &sample.faces, &sample.target, alpha, normal_gradient)?;
    if scale != F::one() {
        d_out.mapv_inplace(|x| x * scale);
    }
    let d_theta = generator_backward(&state.generator, &w.generator, &d_out, &mut grad.generator);
    let width = d_theta.len() / 2;
    encoder_backward(&state.part, &w.encoder, &d_theta.slice(s![..width]).to_owned(), &mut grad.encoder);
    encoder_backward(&state.full, &w.encoder, &d_theta.slice(s![width..]).to_owned(), &mut grad.encoder);
    Ok(value)
}

/// Loss of one sample and its gradient with respect to every parameter.
pub fn forward_backward<F: Scalar>(
    w: &NetworkWeights<F>,
    sample: &PreparedSample<F>,
    alpha: F,
    normal_gradient: NormalGradient,
) -> Result<(F, NetworkWeights<F>)> {
    let mut grad = w.zeros_like();
    let value = accumulate_gradient(w, sample, alpha, normal_gradient, F::one(), &mut grad)?;
    Ok((value, grad))
}
