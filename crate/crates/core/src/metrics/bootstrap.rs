use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateStat {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub resamples: usize,
    pub level: f64,
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Indices of the percentile interval within `b` sorted resampled means.
pub fn percentile_indices(b: usize, level: f64) -> (usize, usize) {
    let lo = (((1.0 - level) / 2.0) * b as f64).floor() as usize;
    let hi = ((((1.0 + level) / 2.0) * b as f64).ceil() as usize).saturating_sub(1);
    (lo.min(b - 1), hi.clamp(lo.min(b - 1), b - 1))
}

/// Percentile bootstrap of the mean with a ChaCha8 stream seeded by `seed`.
pub fn bootstrap_ci(samples: &[f64], resamples: usize, level: f64, seed: u64) -> Result<AggregateStat> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("bootstrap needs at least one sample".into()));
    }
    if resamples == 0 {
        return Err(Error::Precondition("resamples must be at least 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Precondition(format!("level {level} is outside (0,1)")));
    }
    let n = samples.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let draw: Vec<f64> = (0..n).map(|_| samples[rng.gen_range(0..n)]).collect();
            mean(&draw)
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_indices(resamples, level);
    Ok(AggregateStat {
        mean: mean(samples),
        ci_low: means[lo],
        ci_high: means[hi],
        n,
        resamples,
        level,
    })
}
