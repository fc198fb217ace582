use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{vertex_normals, Correspondence, PointCloud, TriMesh, Vector3};

pub const DEFAULT_RESOLUTION: usize = 256;

/// Depth tolerance as a fraction of the mesh bounding-box diagonal, used when
/// a view does not set one explicitly.
const DEFAULT_EPSILON_FRACTION: f64 = 1e-3;

/// Barycentric slack for the point-in-triangle test.
const INSIDE_SLACK: f64 = 1e-12;

/// An orthographic camera on a circle around the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewSpec {
    /// Radians, `[0, 2π)`.
    pub azimuth: f64,
    /// Radians. Zero in the standard protocol.
    pub elevation: f64,
    /// Pixels per image side, at least 16.
    pub image_resolution: usize,
    /// Depth slack in model units; `None` means `1e-3 ×` the mesh bounding-box
    /// diagonal.
    pub depth_epsilon: Option<f64>,
}

impl ViewSpec {
    pub fn at_azimuth(azimuth: f64) -> Self {
        ViewSpec {
            azimuth: azimuth.rem_euclid(TAU),
            elevation: 0.0,
            image_resolution: DEFAULT_RESOLUTION,
            depth_epsilon: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_resolution < 16 {
            return Err(Error::invalid(format!(
                "image resolution {} is below 16",
                self.image_resolution
            )));
        }
        if let Some(eps) = self.depth_epsilon {
            if !(eps > 0.0) {
                return Err(Error::invalid("depth epsilon must be positive"));
            }
        }
        if !self.azimuth.is_finite() || !self.elevation.is_finite() {
            return Err(Error::invalid("view angles must be finite"));
        }
        Ok(())
    }

    /// Unit vector from the origin toward the camera. The camera looks along
    /// its negation; for zero elevation that is `(-cos az, -sin az, 0)`.
    pub fn camera_direction(&self) -> Vector3 {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.rem_euclid(TAU).sin_cos();
        Vector3::new(ce * ca, ce * sa, se)
    }

    /// Image-plane axes `(right, up)`.
    fn image_axes(&self) -> (Vector3, Vector3) {
        let c = self.camera_direction();
        let (sa, ca) = self.azimuth.rem_euclid(TAU).sin_cos();
        let right = Vector3::new(-sa, ca, 0.0);
        let up = right.cross(&(-c));
        (right, up)
    }
}

/// `count` views with azimuths `2πk / count` and zero elevation.
pub fn equally_spaced_views(count: usize) -> Vec<ViewSpec> {
    (0..count)
        .map(|k| ViewSpec::at_azimuth(TAU * k as f64 / count as f64))
        .collect()
}

struct Projected {
    u: f64,
    v: f64,
    depth: f64,
}

/// Triangles bucketed by the image pixels their footprint overlaps, stored
/// CSR-style. Depth lookups evaluate each candidate triangle's plane at the
/// exact sample position, so the result does not depend on where the sample
/// falls inside its pixel.
struct DepthBuffer {
    resolution: usize,
    origin: f64,
    pixel: f64,
    offsets: Vec<usize>,
    triangles: Vec<u32>,
}

impl DepthBuffer {
    fn build(proj: &[Projected], faces: &[[usize; 3]], resolution: usize, half_extent: f64) -> Self {
        let pixel = 2.0 * half_extent / resolution as f64;
        let origin = -half_extent;
        let range = |f: &[usize; 3]| {
            let us = f.map(|i| proj[i].u);
            let vs = f.map(|i| proj[i].v);
            let lo = |x: [f64; 3]| x.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = |x: [f64; 3]| x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let to_px = |c: f64| (((c - origin) / pixel).floor().max(0.0) as usize).min(resolution - 1);
            (to_px(lo(us)), to_px(hi(us)), to_px(lo(vs)), to_px(hi(vs)))
        };
        let mut counts = vec![0usize; resolution * resolution + 1];
        for f in faces {
            let (x0, x1, y0, y1) = range(f);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    counts[y * resolution + x + 1] += 1;
                }
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut triangles = vec![0u32; *counts.last().unwrap()];
        for (t, f) in faces.iter().enumerate() {
            let (x0, x1, y0, y1) = range(f);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let cell = y * resolution + x;
                    triangles[fill[cell]] = t as u32;
                    fill[cell] += 1;
                }
            }
        }
        DepthBuffer {
            resolution,
            origin,
            pixel,
            offsets: counts,
            triangles,
        }
    }

    fn pixel_of(&self, u: f64, v: f64) -> usize {
        let px = |c: f64| (((c - self.origin) / self.pixel).floor().max(0.0) as usize).min(self.resolution - 1);
        px(v) * self.resolution + px(u)
    }

    /// Nearest surface depth at image position `(u, v)`, or infinity.
    fn depth_at(&self, u: f64, v: f64, proj: &[Projected], faces: &[[usize; 3]]) -> f64 {
        let cell = self.pixel_of(u, v);
        let mut best = f64::INFINITY;
        for &t in &self.triangles[self.offsets[cell]..self.offsets[cell + 1]] {
            if let Some(d) = triangle_depth(&faces[t as usize], proj, u, v) {
                best = best.min(d);
            }
        }
        best
    }
}

/// Depth of triangle `f` at image position `(u, v)` if the position lies in
/// its projection. Edge-on triangles never occlude.
fn triangle_depth(f: &[usize; 3], proj: &[Projected], u: f64, v: f64) -> Option<f64> {
    let (a, b, c) = (&proj[f[0]], &proj[f[1]], &proj[f[2]]);
    let det = (b.u - a.u) * (c.v - a.v) - (c.u - a.u) * (b.v - a.v);
    if det.abs() < 1e-300 {
        return None;
    }
    let l1 = ((u - a.u) * (c.v - a.v) - (c.u - a.u) * (v - a.v)) / det;
    let l2 = ((b.u - a.u) * (v - a.v) - (u - a.u) * (b.v - a.v)) / det;
    let l0 = 1.0 - l1 - l2;
    if l0 < -INSIDE_SLACK || l1 < -INSIDE_SLACK || l2 < -INSIDE_SLACK {
        return None;
    }
    Some(l0 * a.depth + l1 * b.depth + l2 * c.depth)
}

/// Vertices of `mesh` visible from `view`.
///
/// A vertex is kept when its depth is within `depth_epsilon` of the nearest
/// surface along its viewing ray. The returned cloud carries the full mesh's
/// connectivity normals, and the correspondence maps each kept vertex to its
/// index in `mesh`. The mesh is expected to be centered.
pub fn project_visible(mesh: &TriMesh, view: &ViewSpec) -> Result<(PointCloud, Correspondence)> {
    view.validate()?;
    if mesh.vertex_count() == 0 {
        return Err(Error::invalid("cannot project an empty mesh"));
    }
    let positions = mesh.positions();
    let eps = view
        .depth_epsilon
        .unwrap_or_else(|| DEFAULT_EPSILON_FRACTION * mesh.vertices.bbox_diagonal());
    let cam = view.camera_direction();
    let (right, up) = view.image_axes();
    let proj: Vec<Projected> = positions
        .iter()
        .map(|p| Projected {
            u: p.coords.dot(&right),
            v: p.coords.dot(&up),
            depth: -p.coords.dot(&cam),
        })
        .collect();
    let half_extent = proj
        .iter()
        .map(|p| p.u.abs().max(p.v.abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE)
        * (1.0 + 1e-9);
    let buffer = DepthBuffer::build(&proj, &mesh.faces, view.image_resolution, half_extent);

    let kept: Vec<usize> = proj
        .iter()
        .enumerate()
        .filter(|(_, p)| p.depth <= buffer.depth_at(p.u, p.v, &proj, &mesh.faces) + eps)
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyProjection);
    }
    let normals = mesh
        .vertices
        .normals
        .clone()
        .unwrap_or_else(|| vertex_normals(mesh));
    let part = PointCloud {
        positions: kept.iter().map(|&i| positions[i]).collect(),
        normals: Some(kept.iter().map(|&i| normals[i]).collect()),
    };
    let map = Correspondence {
        target_indices: kept,
    };
    Ok((part, map))
}

/// Exhaustive ray-cast visibility, used as an independent reference.
#[cfg(test)]
pub(crate) fn brute_force_visible(mesh: &TriMesh, view: &ViewSpec, eps: f64) -> Vec<usize> {
    let cam = view.camera_direction();
    let (right, up) = view.image_axes();
    let proj: Vec<Projected> = mesh
        .positions()
        .iter()
        .map(|p: &crate::geometry::Point3| Projected {
            u: p.coords.dot(&right),
            v: p.coords.dot(&up),
            depth: -p.coords.dot(&cam),
        })
        .collect();
    (0..proj.len())
        .filter(|&i| {
            let nearest = mesh
                .faces
                .iter()
                .filter_map(|f| triangle_depth(f, &proj, proj[i].u, proj[i].v))
                .fold(f64::INFINITY, f64::min);
            proj[i].depth <= nearest + eps
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::shapes::icosphere;
    use crate::geometry::Point3;
    use std::f64::consts::PI;

    fn facing_triangle(x: f64) -> (Vec<Point3>, [usize; 3]) {
        // Counter-clockwise when seen from +x (the azimuth-0 camera).
        (
            vec![
                Point3::new(x, -0.5, -0.5),
                Point3::new(x, 0.5, -0.5),
                Point3::new(x, 0.0, 0.5),
            ],
            [0, 1, 2],
        )
    }

    #[test]
    fn lone_facing_triangle_is_fully_visible() {
        let (p, f) = facing_triangle(0.0);
        let mesh = TriMesh::new(p, vec![f]).unwrap();
        let (part, map) = project_visible(&mesh, &ViewSpec::at_azimuth(0.0)).unwrap();
        assert_eq!(map.target_indices, vec![0, 1, 2]);
        assert_eq!(part.len(), 3);
    }

    #[test]
    fn far_triangle_is_hidden_behind_near_one() {
        let (mut p, f) = facing_triangle(0.5);
        let (far, _) = facing_triangle(-0.5);
        p.extend(far);
        let mesh = TriMesh::new(p, vec![f, [3, 4, 5]]).unwrap();
        let (_, map) = project_visible(&mesh, &ViewSpec::at_azimuth(0.0)).unwrap();
        assert_eq!(map.target_indices, vec![0, 1, 2]);
        // From behind the roles swap.
        let (_, map) = project_visible(&mesh, &ViewSpec::at_azimuth(PI)).unwrap();
        assert_eq!(map.target_indices, vec![3, 4, 5]);
    }

    #[test]
    fn sphere_matches_brute_force_and_is_resolution_independent() {
        let mesh = icosphere(3);
        let eps = 1e-3 * mesh.vertices.bbox_diagonal();
        for k in 0..6 {
            let mut view = ViewSpec::at_azimuth(0.37 + k as f64);
            let reference = brute_force_visible(&mesh, &view, eps);
            for res in [32, 256, 1024] {
                view.image_resolution = res;
                let (_, map) = project_visible(&mesh, &view).unwrap();
                assert_eq!(map.target_indices, reference, "resolution {res}");
            }
        }
    }

    #[test]
    fn convex_visibility_follows_normals() {
        let mesh = icosphere(3).with_vertex_normals();
        let normals = mesh.vertices.normals.clone().unwrap();
        let view = ViewSpec::at_azimuth(1.0);
        let cam = view.camera_direction();
        let (_, map) = project_visible(&mesh, &view).unwrap();
        let kept: std::collections::HashSet<usize> = map.target_indices.iter().copied().collect();
        for (i, n) in normals.iter().enumerate() {
            // Looking direction is -cam; front-facing means n·(-cam) < 0.
            let facing = n.dot(&(-cam));
            if facing < -0.2 {
                assert!(kept.contains(&i), "front vertex {i} dropped");
            }
            if kept.contains(&i) {
                assert!(facing <= 0.05, "back vertex {i} kept ({facing})");
            }
        }
    }

    #[test]
    fn projection_is_subset_with_exact_coordinates() {
        let mesh = icosphere(2);
        let (part, map) = project_visible(&mesh, &ViewSpec::at_azimuth(2.0)).unwrap();
        for (p, &i) in part.positions.iter().zip(&map.target_indices) {
            assert_eq!(*p, mesh.positions()[i]);
        }
    }

    #[test]
    fn full_turn_gives_same_view() {
        let mesh = icosphere(2);
        let mut a = ViewSpec::at_azimuth(0.8);
        let mut b = a;
        b.azimuth += TAU;
        let (_, ma) = project_visible(&mesh, &a).unwrap();
        let (_, mb) = project_visible(&mesh, &b).unwrap();
        assert_eq!(ma, mb);
        a.image_resolution = 8;
        assert!(project_visible(&mesh, &a).is_err());
    }

    #[test]
    fn view_spacing() {
        assert_eq!(equally_spaced_views(1)[0].azimuth, 0.0);
        let four: Vec<f64> = equally_spaced_views(4).iter().map(|v| v.azimuth).collect();
        assert_eq!(four, vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
        let ten = equally_spaced_views(10);
        for w in ten.windows(2) {
            assert!((w[1].azimuth - w[0].azimuth - TAU / 10.0).abs() < 1e-12);
        }
        assert!(ten.iter().all(|v| v.elevation == 0.0));
    }
}
