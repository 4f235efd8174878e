//! Synthetic two-class data shaped like the protein-level classification
//! experiments: class-conditional log-normal feature vectors with a
//! configurable mean shift and equicorrelation.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::encoder::RawDataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoClassConfig {
    pub dim: usize,
    pub samples_per_class: usize,
    /// Per-feature shift of class 1's log-mean relative to class 0.
    pub mean_shift: f64,
    /// Equicorrelation of the log-features, in [0, 1).
    pub correlation: f64,
    pub seed: u64,
}

impl Default for TwoClassConfig {
    fn default() -> Self {
        TwoClassConfig {
            dim: 9,
            samples_per_class: 100,
            mean_shift: 1.0,
            correlation: 0.3,
            seed: 0,
        }
    }
}

/// Draw `samples_per_class` vectors per class: `x = exp(mu_c + L n)` with
/// `n ~ N(0, I)`, `mu_0 = 0`, `mu_1 = mean_shift * 1`, and `L L^T` the
/// equicorrelation matrix. Class 0 rows come first.
pub fn generate_two_class(config: &TwoClassConfig) -> Result<RawDataset> {
    if config.dim == 0 {
        return Err(Error::invalid("dim must be >= 1"));
    }
    if config.samples_per_class < 1 {
        return Err(Error::invalid("samples_per_class must be >= 1"));
    }
    if !(0.0..1.0).contains(&config.correlation) {
        return Err(Error::invalid("correlation must be in [0, 1)"));
    }
    let d = config.dim;
    let rho = config.correlation;
    let sigma = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { rho });
    let chol = sigma
        .cholesky()
        .ok_or_else(|| Error::invalid("correlation matrix is not positive definite"))?;
    let l = chol.l();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut features = Vec::with_capacity(2 * config.samples_per_class);
    let mut labels = Vec::with_capacity(2 * config.samples_per_class);
    for class in 0..2u32 {
        let shift = if class == 0 { 0.0 } else { config.mean_shift };
        for _ in 0..config.samples_per_class {
            let n: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let row: Vec<f64> = (0..d)
                .map(|i| {
                    let correlated: f64 = (0..=i).map(|j| l[(i, j)] * n[j]).sum();
                    (shift + correlated).exp()
                })
                .collect();
            features.push(row);
            labels.push(class);
        }
    }
    RawDataset::new(features, labels)
}
