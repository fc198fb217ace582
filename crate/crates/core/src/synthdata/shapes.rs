//! Small closed reference meshes.

use std::collections::HashMap;

use crate::geometry::{Point3, TriMesh};

/// Axis-aligned unit cube `[0,1]³` with outward winding.
pub fn unit_cube() -> TriMesh {
    let p: Vec<Point3> = (0..8)
        .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let faces = vec![
        [0, 2, 1], [1, 2, 3], // z = 0
        [4, 5, 6], [5, 7, 6], // z = 1
        [0, 1, 4], [1, 5, 4], // y = 0
        [2, 6, 3], [3, 6, 7], // y = 1
        [0, 4, 2], [2, 4, 6], // x = 0
        [1, 3, 5], [3, 7, 5], // x = 1
    ];
    TriMesh::new(p, faces).expect("static cube")
}

/// Unit-radius icosphere after `subdivisions` rounds of 4-to-1 splitting.
pub fn icosphere(subdivisions: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3> = [
        (-1.0, t, 0.0), (1.0, t, 0.0), (-1.0, -t, 0.0), (1.0, -t, 0.0),
        (0.0, -1.0, t), (0.0, 1.0, t), (0.0, -1.0, -t), (0.0, 1.0, -t),
        (t, 0.0, -1.0), (t, 0.0, 1.0), (-t, 0.0, -1.0), (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point3::from(nalgebra::Vector3::new(x, y, z).normalize()))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Point3>| -> usize {
            let key = if a < b { (a, b) } else { (b, a) };
            *midpoints.entry(key).or_insert_with(|| {
                let m = (verts[a].coords + verts[b].coords).normalize();
                verts.push(Point3::from(m));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(verts, faces).expect("icosphere construction")
}

/// Ellipsoid with semi-axes `axes`, sampled on `rings` latitude circles of
/// `segments` vertices each plus the two poles. Useful for building meshes
/// of a chosen size.
pub fn ellipsoid(rings: usize, segments: usize, axes: [f64; 3]) -> TriMesh {
    assert!(rings >= 1 && segments >= 3, "ellipsoid needs at least one ring of three vertices");
    let [a, b, c] = axes;
    let mut positions = vec![Point3::new(0.0, 0.0, c)];
    for i in 1..=rings {
        let theta = std::f64::consts::PI * i as f64 / (rings + 1) as f64;
        for j in 0..segments {
            let phi = std::f64::consts::TAU * j as f64 / segments as f64;
            positions.push(Point3::new(a * theta.sin() * phi.cos(), b * theta.sin() * phi.sin(), c * theta.cos()));
        }
    }
    positions.push(Point3::new(0.0, 0.0, -c));
    let south = positions.len() - 1;
    let at = |i: usize, j: usize| 1 + (i - 1) * segments + j % segments;
    let mut faces = Vec::with_capacity(2 * segments * rings);
    for j in 0..segments {
        faces.push([0, at(1, j), at(1, j + 1)]);
        faces.push([south, at(rings, j + 1), at(rings, j)]);
    }
    for i in 1..rings {
        for j in 0..segments {
            faces.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            faces.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    TriMesh::new(positions, faces).expect("ellipsoid construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_meshes_are_closed_spheres() {
        for m in [unit_cube(), icosphere(0), icosphere(2)] {
            assert_eq!(m.euler_characteristic(), 2);
            assert!(m.is_closed_oriented());
            assert!(crate::geometry::mesh_volume(&m) > 0.0);
        }
    }

    #[test]
    fn ellipsoid_size_and_volume() {
        let m = ellipsoid(70, 100, [0.35, 0.2, 0.8]);
        assert_eq!(m.vertex_count(), 7002);
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.is_closed_oriented());
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.35 * 0.2 * 0.8;
        let v = crate::geometry::mesh_volume(&m);
        assert!(v < exact && v > 0.99 * exact, "{v} vs {exact}");
    }
}
