use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{edge_graph, geodesic::dijkstra, is_connected, surface_area, Correspondence, TriMesh};

/// Fraction of points whose normalized geodesic error is within each
/// threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicCurve {
    pub thresholds: Vec<f64>,
    pub fraction_correct: Vec<f64>,
}

impl GeodesicCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,fraction_correct\n");
        for (t, f) in self.thresholds.iter().zip(&self.fraction_correct) {
            s.push_str(&format!("{t},{f}\n"));
        }
        s
    }
}

/// Geodesic distance on `full` between predicted and true targets, divided
/// by `√(surface area)`.
pub fn geodesic_errors(pred: &Correspondence, gt: &Correspondence, full: &TriMesh) -> Result<Vec<f64>> {
    let n = full.vertex_count();
    if pred.source_size() != gt.source_size() {
        return Err(Error::invalid("predicted and true maps differ in length"));
    }
    if !pred.is_valid_for(n) || !gt.is_valid_for(n) {
        return Err(Error::invalid("map entries out of range for the full shape"));
    }
    if !is_connected(full) {
        return Err(Error::invalid("geodesic errors need a connected mesh"));
    }
    let scale = surface_area(full).sqrt();
    if !(scale > 0.0) {
        return Err(Error::invalid("mesh has zero surface area"));
    }
    let adj = edge_graph(full);
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    Ok(pred
        .target_indices
        .iter()
        .zip(&gt.target_indices)
        .map(|(&p, &g)| {
            if p == g {
                return 0.0;
            }
            let d = cache.entry(g).or_insert_with(|| dijkstra(&adj, g));
            d[p] / scale
        })
        .collect())
}

pub fn geodesic_error_curve(
    pred: &Correspondence,
    gt: &Correspondence,
    full: &TriMesh,
    thresholds: &[f64],
) -> Result<GeodesicCurve> {
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("thresholds must be finite and strictly ascending"));
    }
    let errors = geodesic_errors(pred, gt, full)?;
    let n = errors.len().max(1) as f64;
    let fraction_correct = thresholds
        .iter()
        .map(|&t| errors.iter().filter(|&&e| e <= t).count() as f64 / n)
        .collect();
    Ok(GeodesicCurve {
        thresholds: thresholds.to_vec(),
        fraction_correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_transform, Point3, RigidTransform, Vector3};
    use crate::synthdata::shapes::icosphere;

    fn thresholds() -> Vec<f64> {
        (0..=20).map(|i| i as f64 * 0.01).collect()
    }

    #[test]
    fn perfect_map_is_one_everywhere() {
        let q = icosphere(2);
        let gt = Correspondence::identity(q.vertex_count());
        let c = geodesic_error_curve(&gt, &gt, &q, &thresholds()).unwrap();
        assert!(c.fraction_correct.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn one_ring_errors_are_bounded_by_the_longest_edge() {
        let q = icosphere(2);
        let n = q.vertex_count();
        let edges = q.edges();
        let gt = Correspondence::identity(n);
        // Map every vertex to its first listed neighbour.
        let mut pred = vec![usize::MAX; n];
        for &(a, b) in &edges {
            if pred[a] == usize::MAX {
                pred[a] = b;
            }
            if pred[b] == usize::MAX {
                pred[b] = a;
            }
        }
        let pred = Correspondence { target_indices: pred };
        let p = q.positions();
        let longest = edges.iter().map(|&(a, b)| (p[a] - p[b]).norm()).fold(0.0, f64::max);
        let bound = longest / surface_area(&q).sqrt();
        let c = geodesic_error_curve(&pred, &gt, &q, &[0.0, bound]).unwrap();
        assert_eq!(c.fraction_correct, vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        let q = icosphere(1);
        let gt = Correspondence::identity(q.vertex_count());
        assert!(matches!(geodesic_error_curve(&gt, &gt, &q, &[0.1, 0.05]), Err(Error::InvalidInput(_))));
        let mut split = q.clone();
        split.vertices.positions.push(Point3::new(5.0, 0.0, 0.0));
        let gt2 = Correspondence::identity(split.vertex_count());
        assert!(matches!(geodesic_error_curve(&gt2, &gt2, &split, &[0.1]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn invariant_to_rigid_motion() {
        let q = icosphere(2);
        let n = q.vertex_count();
        let gt = Correspondence::identity(n);
        let pred = Correspondence {
            target_indices: (0..n).map(|i| (i * 7 + 3) % n).collect(),
        };
        let t = RigidTransform::from_axis_angle(&Vector3::new(0.3, -1.0, 0.2), 1.1, Vector3::new(2.0, 0.5, -1.0));
        let moved = TriMesh {
            vertices: apply_transform(&q.vertices, &t),
            faces: q.faces.clone(),
        };
        let a = geodesic_errors(&pred, &gt, &q).unwrap();
        let b = geodesic_errors(&pred, &gt, &moved).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
