use crate::error::{Error, Result};

use super::kdtree::KdTree;
use super::normals::vertex_normals;

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

const UNIT_TOLERANCE: f64 = 1e-6;

/// A set of 3D points with optional unit normals.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub positions: Vec<Point3>,
    pub normals: Option<Vec<Vector3>>,
}

impl PointCloud {
    pub fn new(positions: Vec<Point3>) -> Self {
        PointCloud {
            positions,
            normals: None,
        }
    }

    /// Builds a cloud with normals, checking lengths and unit norms.
    pub fn with_normals(positions: Vec<Point3>, normals: Vec<Vector3>) -> Result<Self> {
        let cloud = PointCloud {
            positions,
            normals: Some(normals),
        };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn has_normals(&self) -> bool {
        self.normals.is_some()
    }

    /// Checks the type invariants: finite positions, matching normal count,
    /// unit normals.
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self
            .positions
            .iter()
            .position(|p| !p.coords.iter().all(|c| c.is_finite()))
        {
            return Err(Error::invalid(format!("position {i} is not finite")));
        }
        if let Some(normals) = &self.normals {
            if normals.len() != self.positions.len() {
                return Err(Error::invalid(format!(
                    "{} normals for {} positions",
                    normals.len(),
                    self.positions.len()
                )));
            }
            if let Some(i) = normals
                .iter()
                .position(|n| (n.norm() - 1.0).abs() > UNIT_TOLERANCE)
            {
                return Err(Error::invalid(format!("normal {i} is not unit length")));
            }
        }
        Ok(())
    }

    pub fn centroid(&self) -> Option<Point3> {
        if self.positions.is_empty() {
            return None;
        }
        let sum = self
            .positions
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Some(Point3::from(sum / self.positions.len() as f64))
    }

    /// Sub-cloud made of the given indices, in order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|n| indices.iter().map(|&i| n[i]).collect()),
        }
    }

    /// Axis-aligned bounding box diagonal length.
    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(&p.coords);
            hi = hi.sup(&p.coords);
        }
        if self.positions.is_empty() {
            0.0
        } else {
            (hi - lo).norm()
        }
    }
}

/// A triangle mesh. Faces index into `vertices.positions`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub vertices: PointCloud,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Builds a mesh, rejecting out-of-range indices and faces that repeat a
    /// vertex.
    pub fn new(positions: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = TriMesh {
            vertices: PointCloud::new(positions),
            faces,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        self.vertices.validate()?;
        let n = self.vertices.len();
        for (f, face) in self.faces.iter().enumerate() {
            if let Some(&bad) = face.iter().find(|&&i| i >= n) {
                return Err(Error::invalid(format!(
                    "face {f} references vertex {bad} but the mesh has {n} vertices"
                )));
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(Error::invalid(format!("face {f} repeats a vertex")));
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.vertices.positions
    }

    /// Same connectivity, new positions. Any stored normals are dropped.
    pub fn with_positions(&self, positions: Vec<Point3>) -> TriMesh {
        assert_eq!(positions.len(), self.vertex_count());
        TriMesh {
            vertices: PointCloud::new(positions),
            faces: self.faces.clone(),
        }
    }

    /// Attaches connectivity-derived vertex normals.
    pub fn with_vertex_normals(mut self) -> TriMesh {
        self.vertices.normals = Some(vertex_normals(&self));
        self
    }

    /// Unique undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edges().len() as i64 + self.faces.len() as i64
    }

    /// True when every undirected edge is shared by exactly two faces that
    /// traverse it in opposite directions.
    pub fn is_closed_oriented(&self) -> bool {
        let mut directed: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .collect();
        directed.sort_unstable();
        if directed.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        directed
            .iter()
            .all(|&(a, b)| directed.binary_search(&(b, a)).is_ok())
    }

    pub fn translated(&self, offset: &Vector3) -> TriMesh {
        TriMesh {
            vertices: PointCloud {
                positions: self.positions().iter().map(|p| p + offset).collect(),
                normals: self.vertices.normals.clone(),
            },
            faces: self.faces.clone(),
        }
    }
}

/// A map from every element of a source shape to an index in a target shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence {
    pub target_indices: Vec<usize>,
}

impl Correspondence {
    /// Checks every index against the target size.
    pub fn new(target_indices: Vec<usize>, target_size: usize) -> Result<Self> {
        if let Some(i) = target_indices.iter().position(|&t| t >= target_size) {
            return Err(Error::invalid(format!(
                "correspondence entry {i} = {} exceeds target size {target_size}",
                target_indices[i]
            )));
        }
        Ok(Correspondence { target_indices })
    }

    pub fn identity(n: usize) -> Self {
        Correspondence {
            target_indices: (0..n).collect(),
        }
    }

    pub fn source_size(&self) -> usize {
        self.target_indices.len()
    }

    pub fn is_valid_for(&self, target_size: usize) -> bool {
        self.target_indices.iter().all(|&t| t < target_size)
    }

    /// `other ∘ self`: source → self's target → other's target.
    pub fn then(&self, other: &Correspondence) -> Correspondence {
        Correspondence {
            target_indices: self
                .target_indices
                .iter()
                .map(|&t| other.target_indices[t])
                .collect(),
        }
    }
}

/// Translates the cloud so its vertex mean is the origin. Returns the removed
/// mean.
pub fn center_at_origin(cloud: &PointCloud) -> Result<(PointCloud, Vector3)> {
    let centroid = cloud
        .centroid()
        .ok_or_else(|| Error::invalid("cannot center an empty cloud"))?;
    let offset = centroid.coords;
    let centered = PointCloud {
        positions: cloud.positions.iter().map(|p| p - offset).collect(),
        normals: cloud.normals.clone(),
    };
    Ok((centered, offset))
}

/// For each query, the index of its closest target (ties go to the lowest
/// target index).
pub fn nearest_neighbors(queries: &PointCloud, targets: &PointCloud) -> Correspondence {
    let tree = KdTree::new(&targets.positions);
    Correspondence {
        target_indices: queries
            .positions
            .iter()
            .map(|q| tree.nearest(q).0)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn centering_already_centered_cloud_is_identity() {
        let cloud = PointCloud::new(vec![Point3::new(-1.0, 0.5, 0.0), Point3::new(1.0, -0.5, 0.0)]);
        let (out, offset) = center_at_origin(&cloud).unwrap();
        assert_eq!(out, cloud);
        assert_eq!(offset, Vector3::zeros());
    }

    #[test]
    fn centering_two_points() {
        let cloud = PointCloud::new(vec![Point3::origin(), Point3::new(2.0, 0.0, 0.0)]);
        let (out, offset) = center_at_origin(&cloud).unwrap();
        assert_eq!(out.positions, vec![Point3::new(-1.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)]);
        assert_eq!(offset, Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn centered_random_cloud_has_zero_mean_and_is_idempotent() {
        let cloud = random_cloud(100, 3).translated_by(Vector3::new(4.0, -2.0, 7.5));
        let (out, _) = center_at_origin(&cloud).unwrap();
        let mut mean = Vector3::zeros();
        for p in &out.positions {
            mean += p.coords;
        }
        mean /= out.len() as f64;
        assert!(mean.norm() < 1e-9);
        let (again, offset) = center_at_origin(&out).unwrap();
        assert!(offset.norm() < 1e-9);
        for (a, b) in again.positions.iter().zip(&out.positions) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn centering_empty_cloud_fails() {
        assert!(matches!(
            center_at_origin(&PointCloud::new(vec![])),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn nearest_neighbor_examples() {
        let c = random_cloud(50, 1);
        assert_eq!(nearest_neighbors(&c, &c), Correspondence::identity(50));
        let q = PointCloud::new(vec![Point3::origin()]);
        let t = PointCloud::new(vec![Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 2.0, 0.0)]);
        assert_eq!(nearest_neighbors(&q, &t).target_indices, vec![0]);
    }

    #[test]
    fn nearest_neighbor_ties_pick_lowest_index() {
        let q = PointCloud::new(vec![Point3::origin()]);
        let t = PointCloud::new(vec![
            Point3::new(0.0, 3.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ]);
        assert_eq!(nearest_neighbors(&q, &t).target_indices, vec![1]);
    }

    #[test]
    fn mesh_rejects_bad_faces() {
        let pts = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        assert!(TriMesh::new(pts.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriMesh::new(pts.clone(), vec![[0, 1, 1]]).is_err());
        assert!(TriMesh::new(pts, vec![[0, 1, 2]]).is_ok());
    }

    #[test]
    fn normals_must_be_unit() {
        assert!(PointCloud::with_normals(vec![Point3::origin()], vec![Vector3::new(0.0, 0.0, 2.0)]).is_err());
        assert!(PointCloud::with_normals(vec![Point3::origin()], vec![]).is_err());
    }

    #[test]
    fn correspondence_range_checked() {
        assert!(Correspondence::new(vec![0, 2], 2).is_err());
        let a = Correspondence::new(vec![1, 0], 2).unwrap();
        let b = Correspondence::new(vec![5, 7], 8).unwrap();
        assert_eq!(a.then(&b).target_indices, vec![7, 5]);
    }

    trait TranslateBy {
        fn translated_by(self, v: Vector3) -> Self;
    }
    impl TranslateBy for PointCloud {
        fn translated_by(mut self, v: Vector3) -> Self {
            for p in &mut self.positions {
                *p += v;
            }
            self
        }
    }
}
