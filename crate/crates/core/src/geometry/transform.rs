use nalgebra::{Matrix3, Rotation3, Unit};

use crate::error::{Error, Result};

use super::types::{Point3, PointCloud, Vector3};

const ORTHO_TOLERANCE: f64 = 1e-9;

/// A proper rigid motion `x -> R x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Validates that `rotation` is orthonormal with determinant +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3) -> Result<Self> {
        let t = RigidTransform {
            rotation,
            translation,
        };
        if !t.is_proper() {
            return Err(Error::invalid("rotation is not a proper orthonormal matrix"));
        }
        Ok(t)
    }

    pub fn from_axis_angle(axis: &Vector3, angle: f64, translation: Vector3) -> Self {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle);
        RigidTransform {
            rotation: *rot.matrix(),
            translation,
        }
    }

    pub fn is_proper(&self) -> bool {
        let r = &self.rotation;
        (r.transpose() * r - Matrix3::identity()).abs().max() <= ORTHO_TOLERANCE
            && (r.determinant() - 1.0).abs() <= ORTHO_TOLERANCE
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidTransform) -> Self {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn apply_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3) -> Vector3 {
        self.rotation * v
    }

    /// Rotation angle in radians.
    pub fn angle(&self) -> f64 {
        ((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

/// Applies `t` to positions and rotates normals.
pub fn apply_transform(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    PointCloud {
        positions: cloud.positions.iter().map(|p| t.apply_point(p)).collect(),
        normals: cloud
            .normals
            .as_ref()
            .map(|ns| ns.iter().map(|n| t.apply_vector(n)).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_leaves_cloud_alone() {
        let c = PointCloud::with_normals(vec![Point3::new(1.0, 2.0, 3.0)], vec![Vector3::x()]).unwrap();
        assert_eq!(apply_transform(&c, &RigidTransform::identity()), c);
    }

    #[test]
    fn quarter_turn_about_z() {
        let t = RigidTransform::from_axis_angle(&Vector3::z(), FRAC_PI_2, Vector3::zeros());
        let p = t.apply_point(&Point3::new(1.0, 0.0, 0.0));
        assert!((p - Point3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
        assert!(t.is_proper());
    }

    #[test]
    fn round_trip_through_inverse() {
        let t = RigidTransform::from_axis_angle(&Vector3::new(1.0, -2.0, 0.5), 1.1, Vector3::new(0.3, -0.7, 2.0));
        let c = PointCloud::with_normals(
            vec![Point3::new(1.0, 2.0, 3.0), Point3::new(-4.0, 0.5, 0.0)],
            vec![Vector3::x(), Vector3::new(0.0, 0.6, 0.8)],
        )
        .unwrap();
        let back = apply_transform(&apply_transform(&c, &t), &t.inverse());
        for (a, b) in back.positions.iter().zip(&c.positions) {
            assert!((a - b).norm() < 1e-9);
        }
        let moved = apply_transform(&c, &t);
        for n in moved.normals.unwrap() {
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
        assert!(t.compose(&t.inverse()).rotation.relative_eq(&Matrix3::identity(), 1e-12, 1e-12));
    }

    #[test]
    fn reflection_is_rejected() {
        let mut m = Matrix3::identity();
        m[(2, 2)] = -1.0;
        assert!(RigidTransform::new(m, Vector3::zeros()).is_err());
    }
}
