use crate::error::{Error, Result};
use crate::geometry::{mesh_volume, KdTree, PointCloud, TriMesh};

/// Column names of the reported metrics, in CSV order.
pub const METRIC_COLUMNS: [&str; 5] = ["euclidean", "chamfer_gt2rec", "chamfer_rec2gt", "chamfer_full", "vol_err"];

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRecord {
    pub sample_id: String,
    pub mean_euclidean: f64,
    /// Logged alongside, not reported.
    pub mean_squared_euclidean: f64,
    pub chamfer_gt_to_rec: f64,
    pub chamfer_rec_to_gt: f64,
    pub chamfer_full: f64,
    pub volumetric_error: f64,
}

impl MetricsRecord {
    /// The reported values in [`METRIC_COLUMNS`] order.
    pub fn values(&self) -> [f64; 5] {
        [
            self.mean_euclidean,
            self.chamfer_gt_to_rec,
            self.chamfer_rec_to_gt,
            self.chamfer_full,
            self.volumetric_error,
        ]
    }
}

fn same_count(rec: &TriMesh, gt: &TriMesh) -> Result<()> {
    if rec.vertex_count() != gt.vertex_count() {
        return Err(Error::invalid(format!(
            "reconstruction has {} vertices, ground truth {}",
            rec.vertex_count(),
            gt.vertex_count()
        )));
    }
    if rec.vertex_count() == 0 {
        return Err(Error::invalid("empty meshes"));
    }
    Ok(())
}

/// Mean distance between corresponding vertices.
pub fn mean_euclidean_error(rec: &TriMesh, gt: &TriMesh) -> Result<f64> {
    same_count(rec, gt)?;
    let s: f64 = rec.positions().iter().zip(gt.positions()).map(|(a, b)| (a - b).norm()).sum();
    Ok(s / rec.vertex_count() as f64)
}

pub fn mean_squared_euclidean_error(rec: &TriMesh, gt: &TriMesh) -> Result<f64> {
    same_count(rec, gt)?;
    let s: f64 = rec.positions().iter().zip(gt.positions()).map(|(a, b)| (a - b).norm_squared()).sum();
    Ok(s / rec.vertex_count() as f64)
}

/// Mean over `a` of the distance to the nearest point of `b`.
pub fn directional_chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Chamfer distance needs two nonempty point sets"));
    }
    let tree = KdTree::new(&b.positions);
    let s: f64 = a.positions.iter().map(|p| tree.nearest(p).1.sqrt()).sum();
    Ok(s / a.len() as f64)
}

/// `| |V(rec)| − |V(gt)| | / |V(gt)|`.
pub fn volumetric_error(rec: &TriMesh, gt: &TriMesh) -> Result<f64> {
    let v = mesh_volume(gt).abs();
    if v < 1e-12 {
        return Err(Error::invalid("ground-truth volume is zero"));
    }
    Ok((mesh_volume(rec).abs() - v).abs() / v)
}

/// All metrics of a reconstruction against a ground truth with the same
/// vertex indexing.
pub fn evaluate_reconstruction(rec: &TriMesh, gt: &TriMesh, sample_id: impl Into<String>) -> Result<MetricsRecord> {
    let gt2rec = directional_chamfer(&gt.vertices, &rec.vertices)?;
    let rec2gt = directional_chamfer(&rec.vertices, &gt.vertices)?;
    Ok(MetricsRecord {
        sample_id: sample_id.into(),
        mean_euclidean: mean_euclidean_error(rec, gt)?,
        mean_squared_euclidean: mean_squared_euclidean_error(rec, gt)?,
        chamfer_gt_to_rec: gt2rec,
        chamfer_rec_to_gt: rec2gt,
        chamfer_full: gt2rec + rec2gt,
        volumetric_error: volumetric_error(rec, gt)?,
    })
}

/// Per-column mean and population standard deviation.
pub fn summarize(records: &[MetricsRecord]) -> ([f64; 5], [f64; 5]) {
    let n = records.len() as f64;
    let mut mean = [0.0; 5];
    for r in records {
        for (m, v) in mean.iter_mut().zip(r.values()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; 5];
    for r in records {
        for k in 0..5 {
            var[k] += (r.values()[k] - mean[k]).powi(2);
        }
    }
    (mean, var.map(|v| (v / n).sqrt()))
}
