//! Geometry primitives on an icosphere: normals, volume, area, geodesics and
//! nearest-neighbor search.
//!
//! ```text
//! cargo run --release --example geometry
//! ```

use partwhole::geometry::{
    center_at_origin, estimate_normals, geodesic_distances, mesh_volume, nearest_neighbors, surface_area,
    vertex_normals, KdTree, Point3, PointCloud, Vector3,
};
use partwhole::synthdata::shapes::icosphere;

fn main() -> partwhole::Result<()> {
    let sphere = icosphere(3);
    println!("icosphere: {} vertices, {} faces", sphere.vertex_count(), sphere.faces.len());
    println!(
        "volume {:.4} (ball {:.4}), area {:.4} (sphere {:.4})",
        mesh_volume(&sphere),
        4.0 / 3.0 * std::f64::consts::PI,
        surface_area(&sphere),
        4.0 * std::f64::consts::PI
    );

    // On a unit sphere every vertex normal points along its position.
    let worst = vertex_normals(&sphere)
        .iter()
        .zip(sphere.positions())
        .map(|(n, p)| (n - p.coords).norm())
        .fold(0.0, f64::max);
    println!("largest deviation of a mesh normal from the radial direction: {worst:.2e}");

    // Normals of the bare point set, oriented toward a viewpoint outside.
    let cloud = sphere.vertices.clone();
    let bare = PointCloud::new(cloud.positions.clone());
    let estimated = estimate_normals(&bare, 12, &Point3::new(5.0, 0.0, 0.0))?;
    let facing = estimated.iter().filter(|n| n.x > 0.0).count();
    println!("PCA normals facing the +x viewpoint: {facing} of {}", estimated.len());

    // Edge-graph geodesics from the north-most vertex.
    let north = (0..sphere.vertex_count())
        .max_by(|&a, &b| sphere.positions()[a].z.total_cmp(&sphere.positions()[b].z))
        .unwrap();
    let d = geodesic_distances(&sphere, north)?;
    let far = d.iter().cloned().fold(0.0, f64::max);
    println!("edge-graph distance pole to pole {far:.4} (great circle {:.4})", std::f64::consts::PI);

    // Nearest neighbors of a shifted copy.
    let (shifted, offset) = center_at_origin(&PointCloud::new(
        sphere.positions().iter().map(|p| p + Vector3::new(0.0, 0.0, 0.01)).collect(),
    ))?;
    let map = nearest_neighbors(&shifted, &sphere.vertices);
    let fixed = map.target_indices.iter().enumerate().filter(|(i, j)| i == *j).count();
    println!("centering removed offset {:?}; {fixed} points map to their own index", offset.as_slice());
    let tree = KdTree::new(sphere.positions());
    let (idx, dist) = tree.nearest(&Point3::new(0.0, 0.0, 2.0));
    println!("closest vertex to (0,0,2): #{idx} at distance {dist:.4}");
    Ok(())
}
