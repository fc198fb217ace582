use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{center_at_origin, Correspondence, PointCloud, TriMesh};
use crate::partiality::{project_visible, ViewSpec};

use super::body::{build_subject, SubjectParams};
use super::skeleton::{pose_shape, PoseParams};

/// Azimuth retries before giving up on an empty projection.
const MAX_PROJECTION_ATTEMPTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split '{other}'"))),
        }
    }
}

/// Size of a generated dataset. Subject ids are assigned consecutively:
/// train first, then val, then test, so the pools never overlap.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    pub train_subjects: u32,
    pub val_subjects: u32,
    pub test_subjects: u32,
    pub poses_per_subject: u32,
    /// Fixed evaluation views per posed shape.
    pub views: usize,
    /// Varies subject shapes and poses; 0 is the reference dataset.
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            train_subjects: 8,
            val_subjects: 2,
            test_subjects: 2,
            poses_per_subject: 40,
            views: 10,
            seed: 0,
        }
    }
}

impl DatasetConfig {
    pub fn split_of(&self, subject_id: u32) -> Split {
        if subject_id < self.train_subjects {
            Split::Train
        } else if subject_id < self.train_subjects + self.val_subjects {
            Split::Val
        } else {
            Split::Test
        }
    }

    pub fn total_subjects(&self) -> u32 {
        self.train_subjects + self.val_subjects + self.test_subjects
    }
}

/// Rest template and posed shapes of one subject. All meshes are centered.
#[derive(Clone, Debug)]
pub struct SubjectShapes {
    pub subject_id: u32,
    pub split: Split,
    pub template: TriMesh,
    /// `(pose_id, mesh)`.
    pub poses: Vec<(u32, TriMesh)>,
}

/// A bank of posed subjects grouped by split.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub views: usize,
    pub subjects: Vec<SubjectShapes>,
}

fn centered_mesh(mesh: &TriMesh) -> TriMesh {
    let (cloud, _) = center_at_origin(&mesh.vertices).expect("meshes are nonempty");
    TriMesh {
        vertices: cloud,
        faces: mesh.faces.clone(),
    }
}

impl Dataset {
    /// Builds every subject and pose.
    pub fn generate(config: &DatasetConfig) -> Dataset {
        let subjects = (0..config.total_subjects())
            .map(|id| {
                let model = build_subject(&SubjectParams::seeded(config.seed, id));
                let poses = (0..config.poses_per_subject)
                    .map(|pose_id| {
                        let mesh = pose_shape(&model, &PoseParams::seeded(config.seed, id, pose_id));
                        (pose_id, centered_mesh(&mesh))
                    })
                    .collect();
                SubjectShapes {
                    subject_id: id,
                    split: config.split_of(id),
                    template: centered_mesh(&model.mesh),
                    poses,
                }
            })
            .collect();
        Dataset {
            views: config.views,
            subjects,
        }
    }

    pub fn pool(&self, split: Split) -> Vec<&SubjectShapes> {
        self.subjects.iter().filter(|s| s.split == split).collect()
    }

    pub fn subject(&self, subject_id: u32) -> Option<&SubjectShapes> {
        self.subjects.iter().find(|s| s.subject_id == subject_id)
    }

    /// Rest-pose template of the first training subject: the constant `T` of
    /// the fixed-template setting.
    pub fn default_template(&self) -> Option<&TriMesh> {
        self.pool(Split::Train).first().map(|s| &s.template)
    }

    /// The physical "1 cm" in model units: one hundredth of the first
    /// subject's template height.
    pub fn centimeter(&self) -> f64 {
        let t = &self.subjects.first().expect("nonempty dataset").template;
        let (lo, hi) = t
            .positions()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
        0.01 * (hi - lo)
    }

    /// Checks the structural assumptions the rest of the crate relies on.
    pub fn validate(&self) -> Result<()> {
        let first = self.subjects.first().ok_or_else(|| Error::Data("dataset has no subjects".into()))?;
        let faces = &first.template.faces;
        for s in &self.subjects {
            if s.poses.len() < 2 {
                return Err(Error::Data(format!("subject {} has fewer than two poses", s.subject_id)));
            }
            for (pose_id, m) in std::iter::once((&u32::MAX, &s.template)).chain(s.poses.iter().map(|(p, m)| (p, m))) {
                if &m.faces != faces || m.vertex_count() != first.template.vertex_count() {
                    return Err(Error::Data(format!(
                        "subject {} pose {pose_id} does not share the template topology",
                        s.subject_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Triplet for explicit subject, poses and view.
    pub fn triplet(&self, subject_id: u32, pose_q: u32, pose_r: u32, view: &ViewSpec) -> Result<Triplet> {
        let s = self
            .subject(subject_id)
            .ok_or_else(|| Error::invalid(format!("unknown subject {subject_id}")))?;
        let find = |p: u32| {
            s.poses
                .iter()
                .find(|(id, _)| *id == p)
                .map(|(_, m)| m)
                .ok_or_else(|| Error::invalid(format!("subject {subject_id} has no pose {p}")))
        };
        let (q, r) = (find(pose_q)?, find(pose_r)?);
        let (part, part_to_r) = project_visible(r, view)?;
        Ok(Triplet {
            part,
            full: q.clone(),
            target: r.clone(),
            gt_map: Correspondence::identity(q.vertex_count()),
            part_to_target: part_to_r,
            subject_id,
            pose_q,
            pose_r,
            azimuth: view.azimuth,
        })
    }

    /// Fixed evaluation set for `split`: every subject, the first
    /// `poses_limit` poses as `R`, each seen from the dataset's equally spaced
    /// views, paired with the next pose of the same subject as `Q`.
    pub fn evaluation_set(&self, split: Split, poses_limit: usize) -> Result<Vec<Triplet>> {
        let views = crate::partiality::equally_spaced_views(self.views);
        let mut out = Vec::new();
        for s in self.pool(split) {
            let n = s.poses.len();
            for k in 0..poses_limit.min(n) {
                let pose_r = s.poses[k].0;
                let pose_q = s.poses[(k + 1) % n].0;
                for v in &views {
                    out.push(self.triplet(s.subject_id, pose_q, pose_r, v)?);
                }
            }
        }
        Ok(out)
    }
}

/// One `(P, Q, R)` sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Triplet {
    /// Partial view `P` of `R`, with normals.
    pub part: PointCloud,
    /// Full shape `Q` in another pose.
    pub full: TriMesh,
    /// Ground-truth completion `R`.
    pub target: TriMesh,
    /// Ground-truth map `Q → R`.
    pub gt_map: Correspondence,
    /// Which vertex of `R` each point of `P` came from.
    pub part_to_target: Correspondence,
    pub subject_id: u32,
    pub pose_q: u32,
    pub pose_r: u32,
    pub azimuth: f64,
}

impl Triplet {
    /// Centers `P`, `Q` and `R` independently.
    pub fn centered(&self) -> Triplet {
        let center = |m: &TriMesh| TriMesh {
            vertices: center_at_origin(&m.vertices).expect("nonempty").0,
            faces: m.faces.clone(),
        };
        Triplet {
            part: center_at_origin(&self.part).expect("nonempty").0,
            full: center(&self.full),
            target: center(&self.target),
            ..self.clone()
        }
    }

    /// Ground-truth `P → Q` map: `π*⁻¹ ∘ part_to_target`.
    pub fn part_to_full(&self) -> Correspondence {
        let mut inverse = vec![0; self.target.vertex_count()];
        for (q, &r) in self.gt_map.target_indices.iter().enumerate() {
            inverse[r] = q;
        }
        self.part_to_target.then(&Correspondence {
            target_indices: inverse,
        })
    }
}

/// Draws a random triplet from `split`: a subject, two distinct poses and a
/// uniform azimuth, all determined by `rng_seed`.
pub fn sample_triplet(dataset: &Dataset, rng_seed: u64, split: Split) -> Result<Triplet> {
    let pool = dataset.pool(split);
    if pool.is_empty() {
        return Err(Error::Data(format!("split {split} has no subjects")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let s = pool[rng.gen_range(0..pool.len())];
    let n = s.poses.len();
    if n < 2 {
        return Err(Error::Data(format!("subject {} has fewer than two poses", s.subject_id)));
    }
    let qi = rng.gen_range(0..n);
    let ri = (qi + rng.gen_range(1..n)) % n;
    let mut last = Error::EmptyProjection;
    for _ in 0..MAX_PROJECTION_ATTEMPTS {
        let view = ViewSpec::at_azimuth(rng.gen_range(0.0..TAU));
        match dataset.triplet(s.subject_id, s.poses[qi].0, s.poses[ri].0, &view) {
            Err(Error::EmptyProjection) => last = Error::EmptyProjection,
            other => return other,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small() -> Dataset {
        Dataset::generate(&DatasetConfig {
            train_subjects: 3,
            val_subjects: 1,
            test_subjects: 1,
            poses_per_subject: 4,
            views: 4,
            seed: 0,
        })
    }

    #[test]
    fn sampled_triplets_are_deterministic_and_consistent() {
        let d = small();
        d.validate().unwrap();
        let a = sample_triplet(&d, 17, Split::Train).unwrap();
        let b = sample_triplet(&d, 17, Split::Train).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.full.vertex_count(), a.target.vertex_count());
        assert_eq!(a.full.faces, a.target.faces);
        assert_ne!(a.pose_q, a.pose_r);
        for (p, &i) in a.part.positions.iter().zip(&a.part_to_target.target_indices) {
            assert_eq!(*p, a.target.positions()[i]);
        }
        assert_eq!(a.gt_map, Correspondence::identity(a.full.vertex_count()));
        assert_eq!(a.part_to_full(), a.part_to_target);
    }

    #[test]
    fn splits_do_not_share_subjects() {
        let d = small();
        let ids = |s: Split| d.pool(s).iter().map(|x| x.subject_id).collect::<HashSet<_>>();
        assert!(ids(Split::Train).is_disjoint(&ids(Split::Val)));
        assert!(ids(Split::Train).is_disjoint(&ids(Split::Test)));
        assert!(ids(Split::Val).is_disjoint(&ids(Split::Test)));
        for seed in 0..20 {
            let t = sample_triplet(&d, seed, Split::Test).unwrap();
            assert!(ids(Split::Test).contains(&t.subject_id));
        }
    }

    #[test]
    fn evaluation_set_covers_every_view() {
        let d = small();
        let set = d.evaluation_set(Split::Test, 2).unwrap();
        assert_eq!(set.len(), 2 * 4);
        let az: HashSet<u64> = set.iter().map(|t| t.azimuth.to_bits()).collect();
        assert_eq!(az.len(), 4);
    }

    #[test]
    fn posed_shapes_stay_inside_generator_range() {
        let d = small();
        for s in &d.subjects {
            for (_, m) in &s.poses {
                for p in m.positions() {
                    assert!(p.coords.amax() < 0.97, "{p:?}");
                }
            }
        }
    }
}
