//! Inference: deform `Q` into a completion of `P`, rigidly align the
//! completion to `P`, and read off the part-to-whole map.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geometry::{
    apply_transform, center_at_origin, estimate_normals, nearest_neighbors, vertex_normals, Correspondence, KdTree,
    Point3, PointCloud, RigidTransform, TriMesh, Vector3,
};
use crate::net::{encode_pair, generate, points6d, NetworkWeights};
use crate::train::{Checkpoint, Mode};

/// Neighbourhood size for normals of raw scans.
pub const NORMAL_NEIGHBORS: usize = 12;

/// Runs the network on centered `P` (with normals) and centered `Q`. The
/// result has `Q`'s vertex indexing and faces.
pub fn complete_with_weights(part: &PointCloud, full: &TriMesh, weights: &NetworkWeights<f32>) -> Result<TriMesh> {
    if full.faces.is_empty() {
        return Err(Error::invalid("the full shape needs faces"));
    }
    let full_cloud = PointCloud::with_normals(full.positions().to_vec(), vertex_normals(full))?;
    let code = encode_pair(part, &full_cloud, weights)?;
    let out = generate(&points6d::<f32>(&full_cloud)?, &code.theta, &weights.generator);
    let positions = out
        .outer_iter()
        .map(|r| Point3::new(r[0] as f64, r[1] as f64, r[2] as f64))
        .collect();
    Ok(full.with_positions(positions))
}

/// Like [`complete_with_weights`], refusing a checkpoint trained in another
/// mode.
pub fn complete(part: &PointCloud, full: &TriMesh, checkpoint: &Checkpoint, mode: Mode) -> Result<TriMesh> {
    if checkpoint.mode() != mode {
        return Err(Error::invalid(format!(
            "checkpoint was trained in {} mode but {} mode was requested",
            checkpoint.mode().as_str(),
            mode.as_str()
        )));
    }
    complete_with_weights(part, full, &checkpoint.weights)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcpConfig {
    pub max_iters: usize,
    /// Fraction of the worst matches ignored at every iteration.
    pub trim_fraction: f64,
    /// Stop once the trimmed RMS changes by less than this.
    pub tolerance: f64,
}

impl Default for IcpConfig {
    fn default() -> Self {
        IcpConfig {
            max_iters: 50,
            trim_fraction: 0.1,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IcpResult {
    pub transform: RigidTransform,
    /// Trimmed RMS of the matches used in each iteration, followed by the
    /// RMS at the final transform.
    pub rms_history: Vec<f64>,
    pub iterations: usize,
}

/// Least-squares rigid motion taking `src[i]` onto `dst[i]`.
pub fn kabsch(src: &[Point3], dst: &[Point3]) -> Result<RigidTransform> {
    assert_eq!(src.len(), dst.len());
    let n = src.len() as f64;
    let cs = src.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n;
    let cd = dst.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n;
    let mut h = Matrix3::zeros();
    let mut spread = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        let a = s.coords - cs;
        h += a * (d.coords - cd).transpose();
        spread += a * a.transpose();
    }
    let mut ev = spread.symmetric_eigenvalues().as_slice().to_vec();
    ev.sort_by(|a, b| b.total_cmp(a));
    if !(ev[1] > 1e-12 * ev[0].max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateGeometry("matched points are collinear".into()));
    }
    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let rotation = v * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    Ok(RigidTransform {
        rotation,
        translation: cd - rotation * cs,
    })
}

struct Matches {
    pairs: Vec<(usize, usize)>,
    rms: f64,
}

/// Nearest source point for every target point under `t`, keeping the best
/// `keep` pairs.
fn trimmed_matches(tree: &KdTree, target: &[Point3], t: &RigidTransform, keep: usize) -> Matches {
    let inv = t.inverse();
    let mut all: Vec<(f64, usize, usize)> = target
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (j, d2) = tree.nearest(&inv.apply_point(p));
            (d2, i, j)
        })
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(keep);
    let rms = (all.iter().map(|m| m.0).sum::<f64>() / keep as f64).sqrt();
    Matches {
        pairs: all.into_iter().map(|(_, i, j)| (i, j)).collect(),
        rms,
    }
}

/// Trimmed point-to-point ICP. The returned transform maps `source` (the
/// reconstruction) onto `target` (the partial scan); matches are sought from
/// each target point into the source.
pub fn icp_align_traced(source: &PointCloud, target: &PointCloud, cfg: &IcpConfig) -> Result<IcpResult> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::invalid("ICP needs two nonempty point sets"));
    }
    if !(0.0..1.0).contains(&cfg.trim_fraction) {
        return Err(Error::invalid("trim_fraction must lie in [0, 1)"));
    }
    let keep = (((1.0 - cfg.trim_fraction) * target.len() as f64).round() as usize).clamp(1, target.len());
    let tree = KdTree::new(&source.positions);
    let mut t = RigidTransform::identity();
    let mut current = trimmed_matches(&tree, &target.positions, &t, keep);
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        history.push(current.rms);
        let (src, dst): (Vec<Point3>, Vec<Point3>) = current
            .pairs
            .iter()
            .map(|&(i, j)| (source.positions[j], target.positions[i]))
            .unzip();
        t = kabsch(&src, &dst)?;
        iterations += 1;
        let next = trimmed_matches(&tree, &target.positions, &t, keep);
        let change = (current.rms - next.rms).abs();
        current = next;
        if change < cfg.tolerance {
            break;
        }
    }
    history.push(current.rms);
    Ok(IcpResult {
        transform: t,
        rms_history: history,
        iterations,
    })
}

pub fn icp_align(source: &PointCloud, target: &PointCloud, max_iters: usize, trim_fraction: f64) -> Result<RigidTransform> {
    let cfg = IcpConfig {
        max_iters,
        trim_fraction,
        ..IcpConfig::default()
    };
    Ok(icp_align_traced(source, target, &cfg)?.transform)
}

/// For each point of `P`, the index of the nearest vertex of the aligned
/// reconstruction, which shares `Q`'s indexing.
pub fn recover_correspondence(part: &PointCloud, aligned: &PointCloud, full: &TriMesh) -> Result<Correspondence> {
    if aligned.len() != full.vertex_count() {
        return Err(Error::invalid(format!(
            "reconstruction has {} vertices but the full shape has {}",
            aligned.len(),
            full.vertex_count()
        )));
    }
    if part.is_empty() {
        return Err(Error::invalid("partial scan is empty"));
    }
    Ok(nearest_neighbors(part, aligned))
}

/// Fills in normals for a raw scan from a PCA fit oriented toward the
/// scanner position.
pub fn ensure_normals(cloud: &PointCloud, viewpoint: &Point3) -> Result<PointCloud> {
    if cloud.has_normals() {
        return Ok(cloud.clone());
    }
    let k = NORMAL_NEIGHBORS.min(cloud.len().saturating_sub(1));
    let normals = estimate_normals(cloud, k, viewpoint)?;
    PointCloud::with_normals(cloud.positions.clone(), normals)
}

/// Everything produced for one `(P, Q)` input.
#[derive(Clone, Debug)]
pub struct Completion {
    /// Network output in the centered frame.
    pub reconstruction: TriMesh,
    /// The reconstruction moved onto `P`, in `P`'s original coordinates.
    pub aligned: TriMesh,
    /// Maps the centered reconstruction onto centered `P`.
    pub transform: RigidTransform,
    /// `P → Q`.
    pub correspondence: Correspondence,
}

/// Centers both inputs, completes, aligns and recovers the correspondence.
/// `part` must carry normals (see [`ensure_normals`]).
pub fn run(part: &PointCloud, full: &TriMesh, weights: &NetworkWeights<f32>, icp: &IcpConfig) -> Result<Completion> {
    let (p, offset) = center_at_origin(part)?;
    let (q, _) = center_at_origin(&full.vertices)?;
    let q = TriMesh {
        vertices: q,
        faces: full.faces.clone(),
    };
    let reconstruction = complete_with_weights(&p, &q, weights)?;
    let transform = icp_align_traced(&reconstruction.vertices, &p, icp)?.transform;
    let moved = apply_transform(&reconstruction.vertices, &transform);
    let correspondence = recover_correspondence(&p, &moved, full)?;
    let aligned = reconstruction.with_positions(moved.positions.iter().map(|x| x + offset).collect());
    Ok(Completion {
        reconstruction,
        aligned,
        transform,
        correspondence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{init_weights, Architecture};
    use crate::synthdata::shapes::icosphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn arch() -> Architecture {
        Architecture {
            encoder_widths: vec![8, 16, 32],
            latent_width: 32,
            generator_widths: vec![32, 16],
        }
    }

    /// Anisotropic cloud: an ellipsoid shell with a bump, no symmetries.
    fn cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| {
                    let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let v = v.normalize();
                    let bump = if v.x > 0.5 && v.y > 0.0 { 0.3 } else { 0.0 };
                    Point3::new(0.9 * v.x + bump, 0.5 * v.y, 0.3 * v.z + 0.1 * v.x * v.x)
                })
                .collect(),
        )
    }

    #[test]
    fn subset_is_already_aligned() {
        let src = cloud(300, 1);
        let part = src.select(&(0..300).step_by(3).collect::<Vec<_>>());
        let t = icp_align(&src, &part, 50, 0.1).unwrap();
        assert!((t.rotation - Matrix3::identity()).norm() < 1e-9);
        assert!(t.translation.norm() < 1e-9);
    }

    #[test]
    fn zero_iterations_return_identity() {
        let src = cloud(50, 2);
        let moved = apply_transform(&src, &RigidTransform::from_axis_angle(&Vector3::z(), 0.3, Vector3::x()));
        assert_eq!(icp_align(&src, &moved, 0, 0.1).unwrap(), RigidTransform::identity());
    }

    #[test]
    fn recovers_a_known_motion() {
        let src = cloud(500, 3);
        let truth = RigidTransform::from_axis_angle(&Vector3::new(1.0, 2.0, -0.5), 0.5, Vector3::new(0.1, -0.2, 0.05));
        let target = apply_transform(&src, &truth);
        let r = icp_align_traced(
            &src,
            &target,
            &IcpConfig {
                trim_fraction: 0.0,
                max_iters: 100,
                ..IcpConfig::default()
            },
        )
        .unwrap();
        assert!((r.transform.rotation - truth.rotation).norm() < 1e-6);
        assert!((r.transform.translation - truth.translation).norm() < 1e-6);
        for w in r.rms_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", r.rms_history);
        }
        assert!(r.transform.is_proper());
    }

    #[test]
    fn kabsch_rejects_reflections_and_lines() {
        let src: Vec<Point3> = cloud(40, 4).positions;
        let mirrored: Vec<Point3> = src.iter().map(|p| Point3::new(-p.x, p.y, p.z)).collect();
        let t = kabsch(&src, &mirrored).unwrap();
        assert!((t.rotation.determinant() - 1.0).abs() < 1e-9);
        let line: Vec<Point3> = (0..10).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(matches!(kabsch(&line, &line), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn completion_keeps_q_structure_and_ignores_p_order() {
        let w = init_weights(1, &arch());
        let q = icosphere(2);
        let p = PointCloud::with_normals(q.positions()[..40].to_vec(), vertex_normals(&q)[..40].to_vec()).unwrap();
        let rec = complete_with_weights(&p, &q, &w).unwrap();
        assert_eq!(rec.vertex_count(), q.vertex_count());
        assert_eq!(rec.faces, q.faces);
        let mut order: Vec<usize> = (0..40).collect();
        order.reverse();
        order.swap(3, 17);
        assert_eq!(complete_with_weights(&p.select(&order), &q, &w).unwrap(), rec);
        assert!(matches!(
            complete_with_weights(&PointCloud::new(p.positions.clone()), &q, &w),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn checkpoint_mode_must_match() {
        let cfg = crate::train::TrainConfig {
            architecture: arch(),
            mode: Mode::FixedTemplate,
            ..Default::default()
        };
        let ck = crate::train::Trainer::new(cfg).unwrap().checkpoint();
        let q = icosphere(1).with_vertex_normals();
        let p = q.vertices.select(&[0, 1, 2, 3]);
        assert!(matches!(complete(&p, &q, &ck, Mode::Normal), Err(Error::InvalidInput(_))));
        assert!(complete(&p, &q, &ck, Mode::FixedTemplate).is_ok());
    }

    #[test]
    fn perfect_reconstruction_gives_the_true_map() {
        let r = icosphere(2);
        let idx: Vec<usize> = (0..r.vertex_count()).filter(|i| i % 4 == 1).collect();
        let p = r.vertices.select(&idx);
        let c = recover_correspondence(&p, &r.vertices, &r).unwrap();
        assert_eq!(c.target_indices, idx);
        assert!(recover_correspondence(&p, &p, &r).is_err());
    }

    #[test]
    fn correspondence_matches_exhaustive_search() {
        let full = icosphere(2);
        let rec = cloud(full.vertex_count(), 5);
        let p = cloud(100, 6);
        let c = recover_correspondence(&p, &rec, &full).unwrap();
        for (i, q) in p.positions.iter().enumerate() {
            let best = (0..rec.len())
                .min_by(|&a, &b| (rec.positions[a] - q).norm_squared().total_cmp(&(rec.positions[b] - q).norm_squared()))
                .unwrap();
            assert_eq!(c.target_indices[i], best);
        }
    }
}
