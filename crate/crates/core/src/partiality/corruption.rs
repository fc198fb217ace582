use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Point3, PointCloud};

/// Perturbs every coordinate with i.i.d. `N(0, sigma²)` noise. Normals are
/// left untouched.
pub fn add_gaussian_noise(cloud: &PointCloud, sigma: f64, rng_seed: u64) -> Result<PointCloud> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    let positions = cloud
        .positions
        .iter()
        .map(|p| {
            Point3::new(
                p.x + normal.sample(&mut rng),
                p.y + normal.sample(&mut rng),
                p.z + normal.sample(&mut rng),
            )
        })
        .collect();
    Ok(PointCloud {
        positions,
        normals: cloud.normals.clone(),
    })
}

/// Keeps a uniform random subset of `round(keep_fraction · n)` points, in their
/// original order. The correspondence maps kept points back to the input.
pub fn downsample_random(
    cloud: &PointCloud,
    keep_fraction: f64,
    rng_seed: u64,
) -> Result<(PointCloud, Correspondence)> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "keep fraction must lie in (0, 1], got {keep_fraction}"
        )));
    }
    let n = cloud.len();
    let keep = (keep_fraction * n as f64).round() as usize;
    if keep == 0 {
        return Err(Error::invalid("downsampling would leave no points"));
    }
    let mut kept = if keep == n {
        (0..n).collect::<Vec<_>>()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        index::sample(&mut rng, n, keep).into_vec()
    };
    kept.sort_unstable();
    let out = cloud.select(&kept);
    Ok((out, Correspondence { target_indices: kept }))
}
