use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};

use super::kdtree::KdTree;
use super::types::{Point3, PointCloud, TriMesh, Vector3};

/// Normal assigned to vertices with no non-degenerate incident face.
pub const FALLBACK_NORMAL: Vector3 = Vector3::new(0.0, 0.0, 1.0);

/// Area-weighted vertex normals from mesh connectivity.
pub fn vertex_normals(mesh: &TriMesh) -> Vec<Vector3> {
    vertex_normals_flagged(mesh).0
}

/// Like [`vertex_normals`], also returning the vertices that fell back to
/// [`FALLBACK_NORMAL`] (isolated, or only degenerate incident faces).
pub fn vertex_normals_flagged(mesh: &TriMesh) -> (Vec<Vector3>, Vec<usize>) {
    let p = mesh.positions();
    let mut sums = vec![Vector3::zeros(); p.len()];
    for f in &mesh.faces {
        // |cross| is twice the face area, so summing raw cross products is
        // already area weighting. Zero-area faces add nothing.
        let c = (p[f[1]] - p[f[0]]).cross(&(p[f[2]] - p[f[0]]));
        for &v in f {
            sums[v] += c;
        }
    }
    let mut flagged = Vec::new();
    let normals = sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let len = s.norm();
            if len > f64::MIN_POSITIVE && len.is_finite() {
                s / len
            } else {
                flagged.push(i);
                FALLBACK_NORMAL
            }
        })
        .collect();
    (normals, flagged)
}

/// PCA normals for an unorganized cloud: the least-variance direction of each
/// point's neighborhood (the point plus its `k` nearest others), oriented so
/// that it faces `viewpoint`.
pub fn estimate_normals(cloud: &PointCloud, k: usize, viewpoint: &Point3) -> Result<Vec<Vector3>> {
    if k < 3 {
        return Err(Error::invalid(format!("normal estimation needs k >= 3, got {k}")));
    }
    if k >= cloud.len() {
        return Err(Error::invalid(format!(
            "normal estimation with k = {k} needs more than {k} points, cloud has {}",
            cloud.len()
        )));
    }
    let tree = KdTree::new(&cloud.positions);
    let normals = cloud
        .positions
        .iter()
        .map(|p| {
            let hood = tree.k_nearest(p, k + 1);
            let mean = hood
                .iter()
                .fold(Vector3::zeros(), |acc, &(i, _)| acc + cloud.positions[i].coords)
                / hood.len() as f64;
            let mut cov = Matrix3::zeros();
            for &(i, _) in &hood {
                let d = cloud.positions[i].coords - mean;
                cov += d * d.transpose();
            }
            let eig = SymmetricEigen::new(cov);
            let smallest = eig.eigenvalues.imin();
            let mut n: Vector3 = eig.eigenvectors.column(smallest).into_owned();
            let len = n.norm();
            n = if len > 0.0 { n / len } else { FALLBACK_NORMAL };
            if n.dot(&(viewpoint - p)) < 0.0 {
                n = -n;
            }
            n
        })
        .collect();
    Ok(normals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> TriMesh {
        TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn flat_square_normals_point_up() {
        for n in vertex_normals(&unit_square()) {
            assert!((n - Vector3::z()).norm() < 1e-12);
        }
    }

    #[test]
    fn cube_corner_normal_is_diagonal() {
        // Three faces of the unit cube meeting at the origin, each split along
        // the diagonal through the origin so both triangles touch the corner.
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 1.0),
            Point3::new(1.0, 0.0, 1.0),
        ];
        // Outward normals of these faces are -z, -x, -y.
        let faces = vec![
            [0, 4, 1],
            [0, 2, 4],
            [0, 5, 2],
            [0, 3, 5],
            [0, 1, 6],
            [0, 6, 3],
        ];
        let mesh = TriMesh::new(p, faces).unwrap();
        let n = vertex_normals(&mesh)[0];
        let expect = -Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        assert!((n - expect).norm() < 1e-12, "{n:?}");
    }

    #[test]
    fn zero_area_face_is_ignored() {
        let mut mesh = unit_square();
        mesh.vertices.positions.push(Point3::new(2.0, 0.0, 0.0));
        mesh.vertices.positions.push(Point3::new(3.0, 0.0, 0.0));
        mesh.faces.push([1, 4, 5]);
        let (normals, flagged) = vertex_normals_flagged(&mesh);
        assert!(normals.iter().all(|n| n.iter().all(|c| c.is_finite())));
        assert!((normals[1] - Vector3::z()).norm() < 1e-12);
        assert_eq!(flagged, vec![4, 5]);
        assert_eq!(normals[4], FALLBACK_NORMAL);
    }

    #[test]
    fn planar_grid_estimates_up_normals() {
        let pts: Vec<Point3> = (0..100)
            .map(|i| Point3::new((i % 10) as f64 * 0.1, (i / 10) as f64 * 0.1, 0.0))
            .collect();
        let normals = estimate_normals(&PointCloud::new(pts), 8, &Point3::new(0.0, 0.0, 5.0)).unwrap();
        for n in normals {
            assert!((n - Vector3::z()).norm() < 1e-6);
        }
    }

    #[test]
    fn sphere_normals_face_the_viewpoint() {
        // Fibonacci sphere.
        let n = 400;
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let pts: Vec<Point3> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                Point3::new(r * t.cos(), r * t.sin(), z)
            })
            .collect();
        let view = Point3::new(0.0, 0.0, 10.0);
        let normals = estimate_normals(&PointCloud::new(pts.clone()), 10, &view).unwrap();
        for (p, n) in pts.iter().zip(&normals) {
            assert!(n.dot(&(view - p)) >= 0.0);
            assert!((n.norm() - 1.0).abs() < 1e-9);
            // Roughly radial too.
            assert!(n.dot(&p.coords).abs() > 0.9);
        }
    }

    #[test]
    fn too_few_points_is_invalid() {
        let pts = vec![Point3::origin(); 4];
        assert!(matches!(
            estimate_normals(&PointCloud::new(pts), 10, &Point3::origin()),
            Err(Error::InvalidInput(_))
        ));
    }
}
