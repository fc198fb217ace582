use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::types::Point3;

const LEAF_SIZE: usize = 8;

enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static 3D kd-tree over a point set.
///
/// Queries return `(index, squared_distance)` and break distance ties toward
/// the lowest point index, so results match an exhaustive scan exactly.
pub struct KdTree {
    points: Vec<[f64; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree {
    pub fn new(points: &[Point3]) -> Self {
        let mut tree = KdTree {
            points: points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for d in 0..3 {
                lo[d] = lo[d].min(self.points[i][d]);
                hi[d] = hi[d].max(self.points[i][d]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap();
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis])
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn dist2(&self, i: usize, q: &[f64; 3]) -> f64 {
        let p = &self.points[i];
        let (dx, dy, dz) = (p[0] - q[0], p[1] - q[1], p[2] - q[2]);
        dx * dx + dy * dy + dz * dz
    }

    /// Closest point to `query`. Panics on an empty tree.
    pub fn nearest(&self, query: &Point3) -> (usize, f64) {
        assert!(!self.is_empty(), "nearest() on an empty kd-tree");
        let q = [query.x, query.y, query.z];
        let mut best = Candidate {
            dist2: f64::INFINITY,
            index: usize::MAX,
        };
        self.nearest_in(0, &q, &mut best);
        (best.index, best.dist2)
    }

    fn nearest_in(&self, node: usize, q: &[f64; 3], best: &mut Candidate) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate {
                        dist2: self.dist2(i, q),
                        index: i,
                    };
                    if c < *best {
                        *best = c;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_in(near, q, best);
                if diff * diff <= best.dist2 {
                    self.nearest_in(far, q, best);
                }
            }
        }
    }

    /// The `k` closest points sorted by `(distance, index)`.
    pub fn k_nearest(&self, query: &Point3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let q = [query.x, query.y, query.z];
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.k_nearest_in(0, &q, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index, c.dist2)).collect()
    }

    fn k_nearest_in(&self, node: usize, q: &[f64; 3], k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate {
                        dist2: self.dist2(i, q),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.k_nearest_in(near, q, k, heap);
                if heap.len() < k || diff * diff <= heap.peek().unwrap().dist2 {
                    self.k_nearest_in(far, q, k, heap);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_nearest(points: &[Point3], q: &Point3) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, p) in points.iter().enumerate() {
            let d = (p - q).norm_squared();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    fn arb_points(max: usize) -> impl Strategy<Value = Vec<Point3>> {
        // Coarse coordinates force plenty of exact ties.
        prop::collection::vec((-8i32..8, -8i32..8, -8i32..8), 1..max).prop_map(|v| {
            v.into_iter()
                .map(|(x, y, z)| Point3::new(x as f64 * 0.25, y as f64 * 0.25, z as f64 * 0.25))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn nearest_matches_exhaustive_scan(targets in arb_points(300), queries in arb_points(60)) {
            let tree = KdTree::new(&targets);
            for q in &queries {
                prop_assert_eq!(tree.nearest(q).0, brute_nearest(&targets, q));
            }
        }

        #[test]
        fn k_nearest_matches_sorted_scan(targets in arb_points(200), q in arb_points(2), k in 1usize..12) {
            let tree = KdTree::new(&targets);
            let q = q[0];
            let mut all: Vec<(f64, usize)> = targets.iter().enumerate().map(|(i, p)| ((p - q).norm_squared(), i)).collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want: Vec<usize> = all.iter().take(k).map(|e| e.1).collect();
            let got: Vec<usize> = tree.k_nearest(&q, k).into_iter().map(|e| e.0).collect();
            prop_assert_eq!(got, want);
        }
    }
}
