//! Forward kinematics and linear-blend skinning for the synthetic humanoid.

use std::f64::consts::PI;

use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point3, RigidTransform, TriMesh, Vector3};

use super::body::SubjectModel;

/// Default per-axis joint limit.
pub const JOINT_LIMIT: f64 = 2.0 * PI / 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Bone {
    pub parent: Option<usize>,
    /// Joint the bone rotates about, in rest-pose coordinates.
    pub pivot: Point3,
    /// Distal end of the bone (the next joint, or the limb tip).
    pub tip: Point3,
}

/// Bones ordered so that parents precede children. Bone 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    pub bones: Vec<Bone>,
}

/// Up to two bone influences per vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkinWeight {
    pub bones: [usize; 2],
    pub weights: [f64; 2],
}

impl SkinWeight {
    pub fn single(bone: usize) -> Self {
        SkinWeight {
            bones: [bone, bone],
            weights: [1.0, 0.0],
        }
    }

    /// `(1 - t)` on `a`, `t` on `b`.
    pub fn blend(a: usize, b: usize, t: f64) -> Self {
        SkinWeight {
            bones: [a, b],
            weights: [1.0 - t, t],
        }
    }
}

/// Joint rotations for one pose.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseParams {
    /// Euler angles `(x, y, z)` in radians for bones `1..`, applied as
    /// `Rz · Ry · Rx` about each bone's pivot.
    pub joint_angles: Vec<Vector3>,
    /// Euler angles of the root rotation about the origin.
    pub global_rotation: Vector3,
    pub pose_id: u32,
}

/// Sampling ranges `[(lo, hi); 3]` per non-root bone.
const POSE_RANGES: [[(f64, f64); 3]; 9] = [
    [(-0.3, 0.3), (0.3, 1.2), (-0.6, 0.6)],    // left upper arm
    [(-0.2, 0.2), (-0.2, 0.2), (0.0, 1.5)],    // left forearm
    [(-0.3, 0.3), (-1.2, -0.3), (-0.6, 0.6)],  // right upper arm
    [(-0.2, 0.2), (-0.2, 0.2), (-1.5, 0.0)],   // right forearm
    [(-0.4, 0.9), (-0.35, 0.05), (-0.3, 0.3)], // left thigh
    [(-1.4, 0.0), (-0.1, 0.1), (-0.1, 0.1)],   // left shin
    [(-0.4, 0.9), (-0.05, 0.35), (-0.3, 0.3)], // right thigh
    [(-1.4, 0.0), (-0.1, 0.1), (-0.1, 0.1)],   // right shin
    [(-0.35, 0.35), (-0.3, 0.3), (-0.6, 0.6)], // neck
];
const GLOBAL_RANGE: [(f64, f64); 3] = [(-0.15, 0.15), (-0.15, 0.15), (-0.4, 0.4)];

impl PoseParams {
    /// All joints at rest.
    pub fn rest(joints: usize) -> Self {
        PoseParams {
            joint_angles: vec![Vector3::zeros(); joints],
            global_rotation: Vector3::zeros(),
            pose_id: 0,
        }
    }

    /// Deterministic random pose for `(subject_id, pose_id)` under dataset
    /// seed 0.
    pub fn sample(subject_id: u32, pose_id: u32) -> Self {
        PoseParams::seeded(0, subject_id, pose_id)
    }

    pub fn seeded(dataset_seed: u64, subject_id: u32, pose_id: u32) -> Self {
        let seed = 0x905e_0000_0000u64
            ^ dataset_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
            ^ ((subject_id as u64) << 20)
            ^ pose_id as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |r: &[(f64, f64); 3]| {
            Vector3::new(
                rng.gen_range(r[0].0..=r[0].1),
                rng.gen_range(r[1].0..=r[1].1),
                rng.gen_range(r[2].0..=r[2].1),
            )
        };
        let joint_angles = POSE_RANGES.iter().map(&mut draw).collect();
        let global_rotation = draw(&GLOBAL_RANGE);
        PoseParams {
            joint_angles,
            global_rotation,
            pose_id,
        }
    }

    pub fn within_limits(&self, limit: f64) -> bool {
        self.joint_angles
            .iter()
            .chain(std::iter::once(&self.global_rotation))
            .all(|a| a.iter().all(|x| x.abs() <= limit))
    }
}

fn euler(a: &Vector3) -> nalgebra::Matrix3<f64> {
    *Rotation3::from_euler_angles(a.x, a.y, a.z).matrix()
}

impl Skeleton {
    /// World transform of every bone for `pose`.
    pub fn forward_kinematics(&self, pose: &PoseParams) -> Vec<RigidTransform> {
        assert_eq!(pose.joint_angles.len() + 1, self.bones.len(), "pose/skeleton joint count mismatch");
        let mut out: Vec<RigidTransform> = Vec::with_capacity(self.bones.len());
        for (j, bone) in self.bones.iter().enumerate() {
            let g = match bone.parent {
                None => RigidTransform {
                    rotation: euler(&pose.global_rotation),
                    translation: Vector3::zeros(),
                },
                Some(parent) => {
                    let r = euler(&pose.joint_angles[j - 1]);
                    let local = RigidTransform {
                        rotation: r,
                        translation: bone.pivot.coords - r * bone.pivot.coords,
                    };
                    out[parent].compose(&local)
                }
            };
            out.push(g);
        }
        out
    }

    /// Posed joint locations: each bone's pivot and tip.
    pub fn posed_joints(&self, pose: &PoseParams) -> Vec<(Point3, Point3)> {
        self.forward_kinematics(pose)
            .iter()
            .zip(&self.bones)
            .map(|(g, b)| (g.apply_point(&b.pivot), g.apply_point(&b.tip)))
            .collect()
    }
}

/// Linear-blend skinning of `template` by `pose`. Topology is unchanged.
pub fn skin(template: &TriMesh, skeleton: &Skeleton, weights: &[SkinWeight], pose: &PoseParams) -> TriMesh {
    let g = skeleton.forward_kinematics(pose);
    let positions = template
        .positions()
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let mut acc = Vector3::zeros();
            for k in 0..2 {
                if w.weights[k] != 0.0 {
                    acc += g[w.bones[k]].apply_point(x).coords * w.weights[k];
                }
            }
            Point3::from(acc)
        })
        .collect();
    template.with_positions(positions)
}

/// Poses a subject's template.
pub fn pose_shape(model: &SubjectModel, pose: &PoseParams) -> TriMesh {
    skin(&model.mesh, &model.skeleton, &model.weights, pose)
}
