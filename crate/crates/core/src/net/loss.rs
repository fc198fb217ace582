use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::Scalar;
use crate::error::{Error, Result};

/// Whether the normal term of the loss is differentiated through the
/// deformed positions or treated as a constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalGradient {
    #[default]
    Differentiable,
    Frozen,
}

fn row3<F: Scalar>(a: ArrayView1<F>) -> [F; 3] {
    [a[0], a[1], a[2]]
}

fn sub<F: Scalar>(a: [F; 3], b: [F; 3]) -> [F; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross<F: Scalar>(a: [F; 3], b: [F; 3]) -> [F; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unnormalized area-weighted vertex normal sums.
fn normal_sums<F: Scalar>(positions: &Array2<F>, faces: &[[usize; 3]]) -> Array2<F> {
    let mut sums = Array2::<F>::zeros((positions.nrows(), 3));
    for f in faces {
        let p0 = row3(positions.row(f[0]));
        let c = cross(sub(row3(positions.row(f[1])), p0), sub(row3(positions.row(f[2])), p0));
        for &v in f {
            for k in 0..3 {
                sums[(v, k)] = sums[(v, k)] + c[k];
            }
        }
    }
    sums
}

fn norm3<F: Scalar>(a: ArrayView1<F>) -> F {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Vertex normals of the deformed shape under `faces`, with the same
/// `(0, 0, 1)` fallback as [`crate::geometry::vertex_normals`].
pub fn predicted_normals<F: Scalar>(positions: &Array2<F>, faces: &[[usize; 3]]) -> Array2<F> {
    let mut n = normal_sums(positions, faces);
    for mut row in n.rows_mut() {
        let len = norm3(row.view());
        if len > F::zero() {
            row.mapv_inplace(|x| x / len);
        } else {
            row.assign(&ndarray::arr1(&[F::zero(), F::zero(), F::one()]));
        }
    }
    n
}

fn check_shapes<F: Scalar>(pred: &Array2<F>, target: &Array2<F>) -> Result<()> {
    if pred.ncols() != 3 || target.ncols() != 6 || pred.nrows() != target.nrows() {
        return Err(Error::invalid(format!(
            "loss expects n×3 predictions and n×6 targets, got {:?} and {:?}",
            pred.dim(),
            target.dim()
        )));
    }
    Ok(())
}

/// `Σ ‖x̂ − x‖² + α²‖n̂ − n‖²` over rows.
pub fn loss<F: Scalar>(pred_positions: &Array2<F>, pred_normals: &Array2<F>, target: &Array2<F>, alpha: F) -> Result<F> {
    check_shapes(pred_positions, target)?;
    check_shapes(pred_normals, target)?;
    let a2 = alpha * alpha;
    let mut total = F::zero();
    for i in 0..target.nrows() {
        for k in 0..3 {
            let dx = pred_positions[(i, k)] - target[(i, k)];
            let dn = pred_normals[(i, k)] - target[(i, 3 + k)];
            total = total + dx * dx + a2 * dn * dn;
        }
    }
    Ok(total)
}

/// Loss of predicted positions, with normals derived through `faces`, and
/// its gradient with respect to the positions.
pub fn loss_and_grad<F: Scalar>(
    pred: &Array2<F>,
    faces: &[[usize; 3]],
    target: &Array2<F>,
    alpha: F,
    normal_gradient: NormalGradient,
) -> Result<(F, Array2<F>)> {
    check_shapes(pred, target)?;
    let two = F::one() + F::one();
    let a2 = alpha * alpha;
    let sums = normal_sums(pred, faces);
    let normals = predicted_normals(pred, faces);
    let value = loss(pred, &normals, target, alpha)?;

    let mut grad = Array2::<F>::zeros(pred.raw_dim());
    for i in 0..pred.nrows() {
        for k in 0..3 {
            grad[(i, k)] = two * (pred[(i, k)] - target[(i, k)]);
        }
    }
    if normal_gradient == NormalGradient::Frozen || a2 == F::zero() || faces.is_empty() {
        return Ok((value, grad));
    }

    // d/ds of s/|s| applied to dL/dn: (g − n (n·g)) / |s|.
    let mut d_sum = Array2::<F>::zeros(pred.raw_dim());
    for i in 0..pred.nrows() {
        let len = norm3(sums.row(i));
        if len <= F::zero() {
            continue;
        }
        let n = row3(normals.row(i));
        let g: [F; 3] = std::array::from_fn(|k| two * a2 * (n[k] - target[(i, 3 + k)]));
        let dot = n[0] * g[0] + n[1] * g[1] + n[2] * g[2];
        for k in 0..3 {
            d_sum[(i, k)] = (g[k] - n[k] * dot) / len;
        }
    }
    for f in faces {
        let gc: [F; 3] = std::array::from_fn(|k| d_sum[(f[0], k)] + d_sum[(f[1], k)] + d_sum[(f[2], k)]);
        let p0 = row3(pred.row(f[0]));
        let e1 = sub(row3(pred.row(f[1])), p0);
        let e2 = sub(row3(pred.row(f[2])), p0);
        let de1 = cross(e2, gc);
        let de2 = cross(gc, e1);
        for k in 0..3 {
            grad[(f[1], k)] = grad[(f[1], k)] + de1[k];
            grad[(f[2], k)] = grad[(f[2], k)] + de2[k];
            grad[(f[0], k)] = grad[(f[0], k)] - de1[k] - de2[k];
        }
    }
    Ok((value, grad))
}
