//! Monte Carlo bookkeeping: estimates with standard errors and seeded,
//! order-independent parallel substreams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A Monte Carlo value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0 }
    }

    /// Sample mean and standard error of the mean.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate { value: f64::NAN, stderr: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Estimate { value: mean, stderr: f64::INFINITY };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Estimate {
            value: mean,
            stderr: (var / n as f64).sqrt(),
        }
    }

    /// `|self - other| ≤ z·σ` with the standard errors combined in quadrature.
    pub fn agrees_with(&self, other: &Estimate, z: f64) -> bool {
        let s = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        (self.value - other.value).abs() <= z * s
    }

    pub fn within(&self, target: f64, z: f64) -> bool {
        (self.value - target).abs() <= z * self.stderr
    }
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6} ± {:.6}", self.value, self.stderr)
    }
}

/// Deterministic generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `total` work items into chunks of at most `chunk` items, runs
/// `f(rng, len)` on each chunk with its own substream, and returns the
/// per-chunk results in chunk order. The result depends only on `seed`,
/// `total` and `chunk`, never on the thread count.
pub fn par_chunks<T, F>(seed: u64, total: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunk = chunk.max(1);
    let count = total.div_ceil(chunk);
    (0..count)
        .into_par_iter()
        .map(|c| {
            let len = chunk.min(total - c * chunk);
            let mut rng = substream(seed, c as u64);
            f(&mut rng, len)
        })
        .collect()
}

/// Draws a fresh 64-bit seed for deriving substreams.
pub fn fork_seed<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    rng.random()
}
