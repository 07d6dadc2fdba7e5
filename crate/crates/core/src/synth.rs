//! Synthetic Gaussian blobs.
//!
//! Noise comes from ChaCha8 seeded with `seed_from_u64`, sampled through
//! `rand_distr::StandardNormal`, so a seed yields the same points on every
//! platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::affinity::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Blobs {
    pub points: PointCloud,
    /// Index of the generating center for each point.
    pub labels: Vec<usize>,
}

/// `per_center` points around each center, in center order, each coordinate
/// perturbed by standard normal noise.
pub fn gaussian_blobs(centers: &[Vec<f64>], per_center: usize, seed: u64) -> Result<Blobs> {
    if centers.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one center is required".into(),
        ));
    }
    if per_center == 0 {
        return Err(Error::InvalidParameter(
            "at least one point per center is required".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(centers.len() * per_center);
    let mut labels = Vec::with_capacity(centers.len() * per_center);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_center {
            rows.push(
                center
                    .iter()
                    .map(|&v| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        v + z
                    })
                    .collect::<Vec<f64>>(),
            );
            labels.push(c);
        }
    }
    Ok(Blobs {
        points: PointCloud::from_rows(&rows)?,
        labels,
    })
}
