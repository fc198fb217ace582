use super::types::TriMesh;

/// Signed enclosed volume, `Σ det(v0, v1, v2) / 6` over faces. Positive for
/// closed meshes with outward (counter-clockwise) winding.
pub fn mesh_volume(mesh: &TriMesh) -> f64 {
    let p = mesh.positions();
    mesh.faces
        .iter()
        .map(|f| p[f[0]].coords.dot(&p[f[1]].coords.cross(&p[f[2]].coords)))
        .sum::<f64>()
        / 6.0
}

pub fn surface_area(mesh: &TriMesh) -> f64 {
    let p = mesh.positions();
    mesh.faces
        .iter()
        .map(|f| 0.5 * (p[f[1]] - p[f[0]]).cross(&(p[f[2]] - p[f[0]])).norm())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point3, Vector3};
    use crate::synthdata::shapes::{icosphere, unit_cube};

    #[test]
    fn cube_and_tetrahedron_volumes() {
        assert!((mesh_volume(&unit_cube()) - 1.0).abs() < 1e-12);
        let tet = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
        .unwrap();
        assert!((mesh_volume(&tet) - 1.0 / 6.0).abs() < 1e-15);
        assert!((surface_area(&unit_cube()) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn icosphere_volume_converges() {
        let exact = 4.0 * std::f64::consts::PI / 3.0;
        let errs: Vec<f64> = (0..4)
            .map(|s| (mesh_volume(&icosphere(s)) - exact).abs() / exact)
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(errs[3] < 0.01, "{errs:?}");
    }

    #[test]
    fn volume_is_translation_invariant() {
        let m = icosphere(2);
        let v = mesh_volume(&m);
        for t in [Vector3::new(3.0, -1.0, 2.0), Vector3::new(-2.5, 1.0, 0.1)] {
            let moved = mesh_volume(&m.translated(&t));
            assert!((moved - v).abs() < 1e-9 * (1.0 + v.abs()));
        }
    }
}
