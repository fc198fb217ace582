use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

use super::types::TriMesh;

/// Weighted adjacency lists of the mesh edge graph (edge length weights).
pub fn edge_graph(mesh: &TriMesh) -> Vec<Vec<(usize, f64)>> {
    let p = mesh.positions();
    let mut adj = vec![Vec::new(); p.len()];
    for (a, b) in mesh.edges() {
        let w = (p[a] - p[b]).norm();
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    adj
}

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub(crate) fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Dist(0.0), source)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    dist
}

/// Shortest edge-path length from `source` to every vertex. Unreachable
/// vertices get `f64::INFINITY`.
pub fn geodesic_distances(mesh: &TriMesh, source: usize) -> Result<Vec<f64>> {
    if source >= mesh.vertex_count() {
        return Err(Error::invalid(format!(
            "geodesic source {source} out of range for {} vertices",
            mesh.vertex_count()
        )));
    }
    Ok(dijkstra(&edge_graph(mesh), source))
}

/// True when the edge graph has a single component covering every vertex.
pub fn is_connected(mesh: &TriMesh) -> bool {
    let n = mesh.vertex_count();
    if n == 0 {
        return false;
    }
    let adj = edge_graph(mesh);
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &(v, _) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}
