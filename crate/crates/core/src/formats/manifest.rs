//! Directory layout written by `gen-data`:
//!
//! ```text
//! manifest.json
//! templates/s000.ply            rest template per subject
//! poses/s000_p000.ply           posed shapes (centered)
//! parts/s000_p000_v00.ply       visible part of a pose, with normals
//! parts/s000_p000_v00.csv       part_index,full_index into that pose
//! ```
//!
//! Each manifest triplet pairs the projected pose `R` with the next pose of
//! the same subject as `Q`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{correspondence_csv, parse_correspondence_csv, read_mesh, write_atomic, write_mesh, write_point_cloud};
use crate::error::{Error, Result};
use crate::geometry::{Correspondence, TriMesh};
use crate::partiality::equally_spaced_views;
use crate::synthdata::{Dataset, DatasetConfig, Split, SubjectShapes, Triplet};

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestPose {
    pub pose_id: u32,
    pub mesh: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestSubject {
    pub id: u32,
    pub split: String,
    pub template: String,
    pub poses: Vec<ManifestPose>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestTriplet {
    pub id: String,
    pub subject: u32,
    pub split: String,
    pub pose_q: u32,
    pub pose_r: u32,
    pub azimuth: f64,
    pub part: String,
    pub correspondence: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub seed: u64,
    pub train_subjects: u32,
    pub val_subjects: u32,
    pub test_subjects: u32,
    pub poses_per_subject: u32,
    pub views: usize,
    pub subjects: Vec<ManifestSubject>,
    pub triplets: Vec<ManifestTriplet>,
}

impl Manifest {
    pub fn config(&self) -> DatasetConfig {
        DatasetConfig {
            train_subjects: self.train_subjects,
            val_subjects: self.val_subjects,
            test_subjects: self.test_subjects,
            poses_per_subject: self.poses_per_subject,
            views: self.views,
            seed: self.seed,
        }
    }
}

fn data_error(dir: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("{}: {msg}", dir.join(MANIFEST_FILE).display()))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Generates the dataset for `config` and writes it under `dir`.
pub fn write_dataset(dir: &Path, config: &DatasetConfig) -> Result<(Manifest, Dataset)> {
    let dataset = Dataset::generate(config);
    for sub in ["templates", "poses", "parts"] {
        create_dir(&dir.join(sub))?;
    }
    let views = equally_spaced_views(config.views);
    let mut subjects = Vec::new();
    let mut triplets = Vec::new();
    for s in &dataset.subjects {
        let template = format!("templates/s{:03}.ply", s.subject_id);
        write_mesh(&dir.join(&template), &s.template)?;
        let mut poses = Vec::new();
        for (pose_id, mesh) in &s.poses {
            let name = format!("poses/s{:03}_p{:03}.ply", s.subject_id, pose_id);
            write_mesh(&dir.join(&name), mesh)?;
            poses.push(ManifestPose {
                pose_id: *pose_id,
                mesh: name,
            });
        }
        let n = s.poses.len();
        for k in 0..n {
            let (pose_r, pose_q) = (s.poses[k].0, s.poses[(k + 1) % n].0);
            for (v, view) in views.iter().enumerate() {
                let t = dataset.triplet(s.subject_id, pose_q, pose_r, view)?;
                let id = format!("s{:03}_p{:03}_v{:02}", s.subject_id, pose_r, v);
                let part = format!("parts/{id}.ply");
                let correspondence = format!("parts/{id}.csv");
                write_point_cloud(&dir.join(&part), &t.part)?;
                write_atomic(&dir.join(&correspondence), correspondence_csv(&t.part_to_target).as_bytes())?;
                triplets.push(ManifestTriplet {
                    id,
                    subject: s.subject_id,
                    split: s.split.to_string(),
                    pose_q,
                    pose_r,
                    azimuth: view.azimuth,
                    part,
                    correspondence,
                });
            }
        }
        subjects.push(ManifestSubject {
            id: s.subject_id,
            split: s.split.to_string(),
            template,
            poses,
        });
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        seed: config.seed,
        train_subjects: config.train_subjects,
        val_subjects: config.val_subjects,
        test_subjects: config.test_subjects,
        poses_per_subject: config.poses_per_subject,
        views: config.views,
        subjects,
        triplets,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok((manifest, dataset))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| data_error(dir, e))?;
    if m.version != MANIFEST_VERSION {
        return Err(data_error(dir, format!("unsupported manifest version {}", m.version)));
    }
    Ok(m)
}

/// Loads the templates and posed shapes listed in the manifest.
pub fn read_dataset(dir: &Path) -> Result<(Manifest, Dataset)> {
    let manifest = read_manifest(dir)?;
    let mut subjects = Vec::new();
    for s in &manifest.subjects {
        let split: Split = s.split.parse().map_err(|e| data_error(dir, e))?;
        let load = |rel: &str| -> Result<TriMesh> { read_mesh(&dir.join(rel)) };
        let poses = s
            .poses
            .iter()
            .map(|p| Ok((p.pose_id, load(&p.mesh)?)))
            .collect::<Result<Vec<_>>>()?;
        subjects.push(SubjectShapes {
            subject_id: s.id,
            split,
            template: load(&s.template)?,
            poses,
        });
    }
    let dataset = Dataset {
        views: manifest.views,
        subjects,
    };
    dataset.validate().map_err(|e| data_error(dir, e))?;
    Ok((manifest, dataset))
}

/// Reads the stored triplets of `split`, in manifest order.
pub fn read_triplets(dir: &Path, manifest: &Manifest, dataset: &Dataset, split: Split) -> Result<Vec<(String, Triplet)>> {
    let mut out = Vec::new();
    for t in manifest.triplets.iter().filter(|t| t.split == split.as_str()) {
        let subject = dataset
            .subject(t.subject)
            .ok_or_else(|| data_error(dir, format!("triplet {} names unknown subject {}", t.id, t.subject)))?;
        let pose = |id: u32| {
            subject
                .poses
                .iter()
                .find(|(p, _)| *p == id)
                .map(|(_, m)| m.clone())
                .ok_or_else(|| data_error(dir, format!("triplet {} names unknown pose {id}", t.id)))
        };
        let (full, target) = (pose(t.pose_q)?, pose(t.pose_r)?);
        let part_mesh = read_mesh(&dir.join(&t.part))?;
        if !part_mesh.vertices.has_normals() {
            return Err(data_error(dir, format!("part {} has no normals", t.part)));
        }
        let csv_path: PathBuf = dir.join(&t.correspondence);
        let text = std::fs::read_to_string(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        let map = parse_correspondence_csv(&text, &csv_path.display().to_string(), target.vertex_count())?;
        if map.source_size() != part_mesh.vertex_count() {
            return Err(data_error(dir, format!("{} does not match {}", t.correspondence, t.part)));
        }
        out.push((
            t.id.clone(),
            Triplet {
                part: part_mesh.vertices,
                gt_map: Correspondence::identity(full.vertex_count()),
                full,
                target,
                part_to_target: map,
                subject_id: t.subject,
                pose_q: t.pose_q,
                pose_r: t.pose_r,
                azimuth: t.azimuth,
            },
        ));
    }
    Ok(out)
}
