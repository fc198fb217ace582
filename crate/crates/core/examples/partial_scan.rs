//! Single-view partial scans of a synthetic subject, plus the noise and
//! decimation corruptions used in the robustness study.
//!
//! ```text
//! cargo run --release --example partial_scan -- [out_dir]
//! ```

use std::path::PathBuf;

use partwhole::formats::{write_mesh, write_point_cloud};
use partwhole::partiality::{add_gaussian_noise, downsample_random, equally_spaced_views, project_visible};
use partwhole::synthdata::{build_subject, pose_shape, PoseParams, SubjectParams};

fn main() -> partwhole::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "partial_scan_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| partwhole::Error::io(&out, e))?;

    let subject = build_subject(&SubjectParams::from_id(0));
    let posed = pose_shape(&subject, &PoseParams::sample(0, 3)).with_vertex_normals();
    write_mesh(&out.join("full.ply"), &posed)?;
    println!("posed subject: {} vertices", posed.vertex_count());

    for (k, view) in equally_spaced_views(4).iter().enumerate() {
        let (part, to_full) = project_visible(&posed, view)?;
        println!(
            "azimuth {:>5.1} deg: {} of {} vertices visible (first maps to full vertex {})",
            view.azimuth.to_degrees(),
            part.len(),
            posed.vertex_count(),
            to_full.target_indices[0]
        );
        write_point_cloud(&out.join(format!("view{k}.ply")), &part)?;
    }

    let (part, _) = project_visible(&posed, &equally_spaced_views(1)[0])?;
    let height = posed.vertices.bbox_diagonal();
    let noisy = add_gaussian_noise(&part, 0.01 * height, 7)?;
    let (sparse, kept) = downsample_random(&part, 0.25, 7)?;
    println!("noisy copy keeps {} points; decimated copy keeps {} (first kept index {})", noisy.len(), sparse.len(), kept.target_indices[0]);
    write_point_cloud(&out.join("noisy.ply"), &noisy)?;
    write_point_cloud(&out.join("sparse.ply"), &sparse)?;
    println!("wrote meshes and scans to {}", out.display());
    Ok(())
}
