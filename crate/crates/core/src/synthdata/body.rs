//! A fixed-topology humanoid: a box torso with five limbs extruded from
//! patches of its faces. Every subject shares the same vertex indexing, so two
//! poses of any subject correspond vertex-for-vertex.

use std::collections::{HashMap, HashSet};
use std::f64::consts::TAU;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point3, TriMesh, Vector3};

use super::skeleton::{Bone, SkinWeight, Skeleton};

const NX: usize = 9;
const NY: usize = 5;
const NZ: usize = 12;
/// Rings per limb beyond the attachment loop.
const RINGS: usize = 10;
/// Radius of the ball the rest-pose template is scaled into.
pub const TEMPLATE_RADIUS: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Limb {
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
    Head,
}

impl Limb {
    pub const ALL: [Limb; 5] = [Limb::LeftArm, Limb::RightArm, Limb::LeftLeg, Limb::RightLeg, Limb::Head];

    fn index(self) -> usize {
        self as usize
    }

    /// Bones of the chain, proximal first.
    pub fn bones(self) -> &'static [usize] {
        match self {
            Limb::LeftArm => &[1, 2],
            Limb::RightArm => &[3, 4],
            Limb::LeftLeg => &[5, 6],
            Limb::RightLeg => &[7, 8],
            Limb::Head => &[9],
        }
    }

    /// Outward axis of the torso face the limb grows from.
    fn axis(self) -> (usize, bool) {
        match self {
            Limb::LeftArm => (0, true),
            Limb::RightArm => (0, false),
            Limb::LeftLeg | Limb::RightLeg => (2, false),
            Limb::Head => (2, true),
        }
    }

    /// Patch cell ranges `(u0, v0)` (3×3 cells) in the face's tangent grid.
    fn patch_origin(self) -> (usize, usize) {
        match self {
            Limb::LeftArm => (1, 8),
            Limb::RightArm => (8, 1),
            Limb::LeftLeg => (1, 5),
            Limb::RightLeg => (1, 1),
            Limb::Head => (3, 1),
        }
    }
}

/// Shape parameters of one synthetic subject.
#[derive(Clone, Debug, PartialEq)]
pub struct SubjectParams {
    /// Per limb, in [`Limb::ALL`] order.
    pub limb_lengths: [f64; 5],
    pub limb_radii: [f64; 5],
    /// Torso width, depth and height multipliers.
    pub torso_scale: Vector3,
    pub subject_id: u32,
}

impl SubjectParams {
    /// Deterministic parameters for `subject_id` under dataset seed 0.
    pub fn from_id(subject_id: u32) -> Self {
        SubjectParams::seeded(0, subject_id)
    }

    /// Deterministic parameters for `subject_id` in the dataset drawn with
    /// `seed`.
    pub fn seeded(seed: u64, subject_id: u32) -> Self {
        let base = 0x5eed_0000_0000 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut rng = ChaCha8Rng::seed_from_u64(base ^ subject_id as u64);
        let arm = 0.55 * rng.gen_range(0.85..1.15);
        let leg = 0.80 * rng.gen_range(0.85..1.15);
        let head = 0.30 * rng.gen_range(0.85..1.15);
        let arm_r = 0.045 * rng.gen_range(0.8..1.2);
        let leg_r = 0.065 * rng.gen_range(0.8..1.2);
        let head_r = 0.09 * rng.gen_range(0.85..1.15);
        let mut side = || rng.gen_range(0.97..1.03);
        let limb_lengths = [arm * side(), arm * side(), leg * side(), leg * side(), head];
        let limb_radii = [arm_r, arm_r, leg_r, leg_r, head_r];
        let torso_scale = Vector3::new(
            rng.gen_range(0.85..1.15),
            rng.gen_range(0.85..1.15),
            rng.gen_range(0.85..1.15),
        );
        SubjectParams {
            limb_lengths,
            limb_radii,
            torso_scale,
            subject_id,
        }
    }
}

/// Where a template vertex lives; positions are derived from this per subject.
#[derive(Clone, Copy, Debug)]
enum Role {
    Torso([usize; 3]),
    Ring { limb: Limb, ring: usize, angle: f64 },
    Cap { limb: Limb, du: f64, dv: f64 },
}

struct Topology {
    roles: Vec<Role>,
    faces: Vec<[usize; 3]>,
}

fn tangent_axes(axis: usize, positive: bool) -> (usize, usize) {
    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
    if positive {
        (b, c)
    } else {
        (c, b)
    }
}

fn grid_extent(axis: usize) -> usize {
    [NX, NY, NZ][axis]
}

fn topology() -> &'static Topology {
    static TOPOLOGY: OnceLock<Topology> = OnceLock::new();
    TOPOLOGY.get_or_init(build_topology)
}

fn build_topology() -> Topology {
    let mut roles: Vec<Role> = Vec::new();
    let mut grid_index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut quads: Vec<[usize; 4]> = Vec::new();
    // (limb index) per quad, for patch membership.
    let mut quad_patch: Vec<Option<Limb>> = Vec::new();

    let mut vertex = |g: [usize; 3], roles: &mut Vec<Role>| -> usize {
        *grid_index.entry(g).or_insert_with(|| {
            roles.push(Role::Torso(g));
            roles.len() - 1
        })
    };

    for axis in 0..3 {
        for positive in [false, true] {
            let (ua, va) = tangent_axes(axis, positive);
            let fixed = if positive { grid_extent(axis) } else { 0 };
            for u in 0..grid_extent(ua) {
                for v in 0..grid_extent(va) {
                    let corner = |du: usize, dv: usize| {
                        let mut g = [0; 3];
                        g[axis] = fixed;
                        g[ua] = u + du;
                        g[va] = v + dv;
                        g
                    };
                    let q = [
                        vertex(corner(0, 0), &mut roles),
                        vertex(corner(1, 0), &mut roles),
                        vertex(corner(1, 1), &mut roles),
                        vertex(corner(0, 1), &mut roles),
                    ];
                    quads.push(q);
                    let owner = Limb::ALL.iter().copied().find(|l| {
                        let (u0, v0) = l.patch_origin();
                        l.axis() == (axis, positive) && (u0..u0 + 3).contains(&u) && (v0..v0 + 3).contains(&v)
                    });
                    quad_patch.push(owner);
                }
            }
        }
    }

    let mut side_quads: Vec<[usize; 4]> = Vec::new();
    for limb in Limb::ALL {
        let patch: Vec<usize> = (0..quads.len()).filter(|&q| quad_patch[q] == Some(limb)).collect();
        assert_eq!(patch.len(), 9);
        let directed: HashSet<(usize, usize)> = patch
            .iter()
            .flat_map(|&q| (0..4).map(move |k| (q, k)))
            .map(|(q, k)| (quads[q][k], quads[q][(k + 1) % 4]))
            .collect();
        let next: HashMap<usize, usize> = directed
            .iter()
            .filter(|(a, b)| !directed.contains(&(*b, *a)))
            .map(|&(a, b)| (a, b))
            .collect();
        let start = *next.keys().min().unwrap();
        let mut loop_ = vec![start];
        while let Some(&n) = next.get(loop_.last().unwrap()) {
            if n == start {
                break;
            }
            loop_.push(n);
        }
        assert_eq!(loop_.len(), next.len());
        let boundary: HashSet<usize> = loop_.iter().copied().collect();

        let (axis, positive) = limb.axis();
        let (ua, va) = tangent_axes(axis, positive);
        let (u0, v0) = limb.patch_origin();
        let (cu, cv) = (u0 as f64 + 1.5, v0 as f64 + 1.5);
        let local = |roles: &[Role], vtx: usize| match roles[vtx] {
            Role::Torso(g) => (g[ua] as f64 - cu, g[va] as f64 - cv),
            _ => unreachable!(),
        };
        let (su, sv) = local(&roles, start);
        let start_angle = sv.atan2(su);

        let mut prev: Vec<usize> = loop_.clone();
        for ring in 1..=RINGS {
            let current: Vec<usize> = (0..loop_.len())
                .map(|k| {
                    roles.push(Role::Ring {
                        limb,
                        ring,
                        angle: start_angle + TAU * k as f64 / loop_.len() as f64,
                    });
                    roles.len() - 1
                })
                .collect();
            for k in 0..loop_.len() {
                let k1 = (k + 1) % loop_.len();
                side_quads.push([prev[k], prev[k1], current[k1], current[k]]);
            }
            prev = current;
        }
        // Move the patch (the cap) to the end of the limb.
        let relabel: HashMap<usize, usize> = loop_.iter().copied().zip(prev.iter().copied()).collect();
        for &q in &patch {
            for vtx in quads[q].iter_mut() {
                if let Some(&r) = relabel.get(vtx) {
                    *vtx = r;
                } else if !boundary.contains(vtx) {
                    if let Role::Torso(_) = roles[*vtx] {
                        let (du, dv) = local(&roles, *vtx);
                        roles[*vtx] = Role::Cap { limb, du, dv };
                    }
                }
            }
        }
    }
    quads.extend(side_quads);

    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    Topology { roles, faces }
}

/// A subject's rest-pose template together with its rig.
#[derive(Clone, Debug)]
pub struct SubjectModel {
    pub params: SubjectParams,
    pub mesh: TriMesh,
    pub skeleton: Skeleton,
    pub weights: Vec<SkinWeight>,
}

struct LimbFrame {
    origin: Point3,
    axis: Vector3,
    u: Vector3,
    v: Vector3,
}

fn unit(axis: usize) -> Vector3 {
    let mut e = Vector3::zeros();
    e[axis] = 1.0;
    e
}

/// Ring radius along the limb, `t` in `(0, 1]`.
fn ring_radius(limb: Limb, radius: f64, t: f64) -> f64 {
    match limb {
        Limb::LeftArm | Limb::RightArm => radius * (1.0 - 0.35 * t),
        Limb::LeftLeg | Limb::RightLeg => radius * (1.0 - 0.4 * t),
        Limb::Head => {
            let neck = 0.45 * radius;
            if t < 0.3 {
                neck
            } else {
                let x = (t - 0.65) / 0.35;
                (radius * (1.0 - x * x).max(0.0).sqrt()).max(0.35 * radius)
            }
        }
    }
}

/// Builds the rest-pose template, skeleton and skinning weights of a subject.
pub fn build_subject(params: &SubjectParams) -> SubjectModel {
    let topo = topology();
    let size = Vector3::new(0.36, 0.20, 0.55).component_mul(&params.torso_scale);
    let grid_point = |g: [usize; 3]| {
        Point3::new(
            (g[0] as f64 / NX as f64 - 0.5) * size.x,
            (g[1] as f64 / NY as f64 - 0.5) * size.y,
            (g[2] as f64 / NZ as f64 - 0.5) * size.z,
        )
    };
    let frames: Vec<LimbFrame> = Limb::ALL
        .iter()
        .map(|&limb| {
            let (axis, positive) = limb.axis();
            let (ua, va) = tangent_axes(axis, positive);
            let (u0, v0) = limb.patch_origin();
            let mut g = [0.0; 3];
            g[axis] = if positive { grid_extent(axis) as f64 } else { 0.0 };
            g[ua] = u0 as f64 + 1.5;
            g[va] = v0 as f64 + 1.5;
            let origin = Point3::new(
                (g[0] / NX as f64 - 0.5) * size.x,
                (g[1] / NY as f64 - 0.5) * size.y,
                (g[2] / NZ as f64 - 0.5) * size.z,
            );
            let sign = if positive { 1.0 } else { -1.0 };
            LimbFrame {
                origin,
                axis: unit(axis) * sign,
                u: unit(ua),
                v: unit(va),
            }
        })
        .collect();

    let mut positions: Vec<Point3> = topo
        .roles
        .iter()
        .map(|role| match *role {
            Role::Torso(g) => grid_point(g),
            Role::Ring { limb, ring, angle } => {
                let f = &frames[limb.index()];
                let t = ring as f64 / RINGS as f64;
                let len = params.limb_lengths[limb.index()];
                let r = ring_radius(limb, params.limb_radii[limb.index()], t);
                f.origin + f.axis * (len * t) + (f.u * angle.cos() + f.v * angle.sin()) * r
            }
            Role::Cap { limb, du, dv } => {
                let f = &frames[limb.index()];
                let len = params.limb_lengths[limb.index()];
                let r = ring_radius(limb, params.limb_radii[limb.index()], 1.0);
                f.origin + f.axis * (len + 0.3 * r) + (f.u * du + f.v * dv) * (0.6 * r / 1.5)
            }
        })
        .collect();

    let mut bones = vec![Bone {
        parent: None,
        pivot: Point3::origin(),
        tip: Point3::origin(),
    }];
    for limb in Limb::ALL {
        let f = &frames[limb.index()];
        let len = params.limb_lengths[limb.index()];
        let chain = limb.bones();
        let seg = len / chain.len() as f64;
        for (k, _) in chain.iter().enumerate() {
            bones.push(Bone {
                parent: Some(if k == 0 { 0 } else { chain[k - 1] }),
                pivot: f.origin + f.axis * (seg * k as f64),
                tip: f.origin + f.axis * (seg * (k + 1) as f64),
            });
        }
    }

    let weights: Vec<SkinWeight> = topo
        .roles
        .iter()
        .map(|role| match *role {
            Role::Torso(_) => SkinWeight::single(0),
            Role::Cap { limb, .. } => SkinWeight::single(*limb.bones().last().unwrap()),
            Role::Ring { limb, ring, .. } => {
                let chain = limb.bones();
                let per_bone = RINGS / chain.len();
                // Each joint ring is shared half-and-half between the bones it
                // connects.
                if ring == 1 {
                    SkinWeight::blend(0, chain[0], 0.5)
                } else if ring % per_bone == 0 && ring / per_bone < chain.len() {
                    let k = ring / per_bone;
                    SkinWeight::blend(chain[k - 1], chain[k], 0.5)
                } else {
                    SkinWeight::single(chain[((ring - 1) / per_bone).min(chain.len() - 1)])
                }
            }
        })
        .collect();

    let max_norm = positions.iter().map(|p| p.coords.norm()).fold(0.0, f64::max);
    let scale = TEMPLATE_RADIUS / max_norm;
    for p in &mut positions {
        *p = Point3::from(p.coords * scale);
    }
    for b in &mut bones {
        b.pivot = Point3::from(b.pivot.coords * scale);
        b.tip = Point3::from(b.tip.coords * scale);
    }

    SubjectModel {
        params: params.clone(),
        mesh: TriMesh::new(positions, topo.faces.clone()).expect("template topology is valid"),
        skeleton: Skeleton { bones },
        weights,
    }
}
