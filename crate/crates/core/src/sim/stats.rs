use rand::Rng;
use rand_distr::{Distribution as _, Geometric};
use serde::Serialize;

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// An estimated probability with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z95);
        Proportion {
            successes,
            trials,
            estimate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Mean and variance of `tau = G L` where the block count `G` is geometric
/// on `{1, 2, ...}` with repeat probability `q`: `L/(1-q)` and `L^2 q/(1-q)^2`.
pub fn geometric_stats(q: f64, block_len: usize) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("repeat probability must lie in [0, 1), got {q}")));
    }
    let l = block_len as f64;
    Ok((l / (1.0 - q), l * l * q / ((1.0 - q) * (1.0 - q))))
}

/// One draw of `G L` from the block-repeat process.
pub fn sample_block_repeat<R: Rng + ?Sized>(rng: &mut R, q: f64, block_len: usize) -> Result<u64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("repeat probability must lie in [0, 1), got {q}")));
    }
    let failures = Geometric::new(1.0 - q)
        .map_err(|e| Error::Domain(e.to_string()))?
        .sample(rng);
    Ok((failures + 1) * block_len as u64)
}

/// Running first and second moments.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}
