//! Times each inference stage on a 7k-vertex full shape and a 4k-point scan.
//!
//! ```text
//! cargo run --release --example latency -- [model.ckpt]
//! ```
//!
//! Pass a trained checkpoint for representative numbers. Untrained weights
//! map every vertex to nearly the same point, which makes the
//! nearest-neighbor searches in ICP degenerate and slow.

use std::time::Instant;

use partwhole::geometry::{apply_transform, center_at_origin};
use partwhole::net::{init_weights, Architecture};
use partwhole::pipeline::{self, complete_with_weights, icp_align_traced, recover_correspondence, IcpConfig};
use partwhole::synthdata::shapes::ellipsoid;
use partwhole::train::Checkpoint;

fn main() -> partwhole::Result<()> {
    let full = ellipsoid(70, 100, [0.35, 0.2, 0.8]);
    let scanned = ellipsoid(70, 100, [0.3, 0.22, 0.78]).with_vertex_normals();
    let visible: Vec<usize> = (0..scanned.vertex_count())
        .filter(|&i| scanned.positions()[i].x > -0.06)
        .take(4000)
        .collect();
    let part = scanned.vertices.select(&visible);
    let weights = match std::env::args().nth(1) {
        Some(path) => Checkpoint::load(std::path::Path::new(&path))?.weights,
        None => init_weights(0, &Architecture::default()),
    };
    println!("n_q = {}, n_p = {}", full.vertex_count(), part.len());

    for run in 0..3 {
        let t0 = Instant::now();
        let (p, _) = center_at_origin(&part)?;
        let rec = complete_with_weights(&p, &full, &weights)?;
        let t1 = Instant::now();
        let icp = icp_align_traced(&rec.vertices, &p, &IcpConfig::default())?;
        let t2 = Instant::now();
        let moved = apply_transform(&rec.vertices, &icp.transform);
        recover_correspondence(&p, &moved, &full)?;
        let t3 = Instant::now();
        println!(
            "run {run}: network {:.0} ms, ICP {:.0} ms ({} iterations), correspondence {:.0} ms, total {:.0} ms",
            (t1 - t0).as_secs_f64() * 1e3,
            (t2 - t1).as_secs_f64() * 1e3,
            icp.iterations,
            (t3 - t2).as_secs_f64() * 1e3,
            (t3 - t0).as_secs_f64() * 1e3
        );
    }
    let start = Instant::now();
    pipeline::run(&part, &full, &weights, &IcpConfig::default())?;
    println!("pipeline::run end to end: {:.0} ms", start.elapsed().as_secs_f64() * 1e3);
    Ok(())
}
