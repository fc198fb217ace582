use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::metrics::{evaluate_reconstruction, summarize, MetricsRecord, METRIC_COLUMNS};
use crate::error::{Error, Result};
use crate::geometry::{center_at_origin, PointCloud, TriMesh};
use crate::net::NetworkWeights;
use crate::partiality::{add_gaussian_noise, downsample_random};
use crate::pipeline::complete_with_weights;
use crate::synthdata::Triplet;

/// Noise levels in centimeters.
pub const NOISE_LEVELS_CM: [f64; 5] = [0.0, 1.0, 2.0, 3.0, 4.0];
/// Fractions of the scan's points kept.
pub const DOWNSAMPLE_LEVELS: [f64; 5] = [1.0, 0.75, 0.5, 0.25, 0.1];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Noise,
    Downsample,
    Angle,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Noise => "noise",
            Suite::Downsample => "downsample",
            Suite::Angle => "angle",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise" => Ok(Suite::Noise),
            "downsample" => Ok(Suite::Downsample),
            "angle" => Ok(Suite::Angle),
            other => Err(Error::invalid(format!("unknown robustness suite '{other}'"))),
        }
    }
}

/// Completes a triplet's scan (optionally corrupted first) and scores the
/// result against the centered ground truth. With `template`, it replaces
/// `Q` as the network's full-shape input.
pub fn evaluate_triplet(
    weights: &NetworkWeights<f32>,
    triplet: &Triplet,
    template: Option<&TriMesh>,
    corrupt: impl Fn(&PointCloud) -> Result<PointCloud>,
    sample_id: impl Into<String>,
) -> Result<(MetricsRecord, TriMesh)> {
    let t = triplet.centered();
    let full = match template {
        Some(tm) => TriMesh {
            vertices: center_at_origin(&tm.vertices)?.0,
            faces: tm.faces.clone(),
        },
        None => t.full.clone(),
    };
    let part = center_at_origin(&corrupt(&t.part)?)?.0;
    let rec = complete_with_weights(&part, &full, weights)?;
    let gt = TriMesh {
        vertices: t.target.vertices.select(&t.gt_map.target_indices),
        faces: rec.faces.clone(),
    };
    Ok((evaluate_reconstruction(&rec, &gt, sample_id)?, rec))
}

/// One line of a robustness sweep: the mean metrics over every sample at a
/// given level.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessRow {
    pub suite: Suite,
    /// Noise σ in centimeters, keep fraction, or azimuth in radians.
    pub level: f64,
    pub count: usize,
    pub mean: [f64; 5],
}

fn sample_seed(seed: u64, level: usize, sample: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((level as u64) << 32) ^ sample as u64
}

/// Runs one sweep over `test_set`. `centimeter` converts noise levels to
/// model units.
pub fn run_robustness_suite(
    weights: &NetworkWeights<f32>,
    test_set: &[Triplet],
    template: Option<&TriMesh>,
    suite: Suite,
    centimeter: f64,
    seed: u64,
) -> Result<Vec<RobustnessRow>> {
    if test_set.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    let sweep = |levels: &[f64], corrupt: &dyn Fn(&PointCloud, f64, u64) -> Result<PointCloud>| -> Result<Vec<RobustnessRow>> {
        levels
            .iter()
            .enumerate()
            .map(|(li, &level)| {
                let records = test_set
                    .iter()
                    .enumerate()
                    .map(|(si, t)| {
                        let s = sample_seed(seed, li, si);
                        evaluate_triplet(weights, t, template, |p| corrupt(p, level, s), "").map(|r| r.0)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(RobustnessRow {
                    suite,
                    level,
                    count: records.len(),
                    mean: summarize(&records).0,
                })
            })
            .collect()
    };
    match suite {
        Suite::Noise => {
            sweep(&NOISE_LEVELS_CM, &|p, cm, s| add_gaussian_noise(p, cm * centimeter, s))
        }
        Suite::Downsample => sweep(&DOWNSAMPLE_LEVELS, &|p, keep, s| downsample_random(p, keep, s).map(|r| r.0)),
        Suite::Angle => {
            let mut groups: BTreeMap<u64, Vec<MetricsRecord>> = BTreeMap::new();
            for t in test_set {
                let (r, _) = evaluate_triplet(weights, t, template, |p| Ok(p.clone()), "")?;
                groups.entry(t.azimuth.to_bits()).or_default().push(r);
            }
            let mut rows: Vec<RobustnessRow> = groups
                .into_iter()
                .map(|(bits, records)| RobustnessRow {
                    suite,
                    level: f64::from_bits(bits),
                    count: records.len(),
                    mean: summarize(&records).0,
                })
                .collect();
            rows.sort_by(|a, b| a.level.total_cmp(&b.level));
            Ok(rows)
        }
    }
}

pub fn robustness_csv(rows: &[RobustnessRow]) -> String {
    let mut s = format!("suite,level,count,{}\n", METRIC_COLUMNS.join(","));
    for r in rows {
        let vals: Vec<String> = r.mean.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("{},{},{},{}\n", r.suite, r.level, r.count, vals.join(",")));
    }
    s
}
