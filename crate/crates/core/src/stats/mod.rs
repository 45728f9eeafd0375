//! Monte Carlo layer: exact-in-law orbit sampling, correlation estimators, decay fits,
//! CLT diagnostics and the maximal-entropy measures of the Dyck shift.
//!
//! Every estimator splits its samples into fixed-size chunks. Chunk `c` draws from a
//! ChaCha8 stream seeded by `seed` with stream id `c`, and chunk results are reduced in
//! chunk order, so outputs do not depend on the number of worker threads.

pub mod clt;
pub mod correlation;
pub mod fit;
pub mod mme;
pub mod observable;
pub mod sampler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use clt::{birkhoff_average, clt_diagnostic, BirkhoffAverage, CltSummary};
pub use correlation::{
    correlation_series, estimate_correlation, estimate_k_correlation, CorrelationSeries, Estimate,
};
pub use fit::{fit_decay_rate, DecayFit};
pub use mme::{
    entropy_estimate, entropy_profile, mme_cylinder, mme_sample, mme_samples, EntropyEstimate,
    EntropyProfile, MmeTag, MmeVariant,
};
pub use observable::Observable;
pub use sampler::{sample_return_times, OrbitSampler, ReturnTimeHistogram, SampledOrbit};

/// Samples per chunk. Fixed so that results are independent of the thread count.
pub const CHUNK: usize = 4096;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `f(rng, count)` on every chunk in parallel and returns the results in chunk order.
pub fn run_chunks<T, F>(samples: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            f(&mut rng, count)
        })
        .collect()
}

/// Neumaier's compensated summation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Count, sum and sum of squares with compensated accumulation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    sum: NeumaierSum,
    sumsq: NeumaierSum,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum.add(v);
        self.sumsq.add(v * v);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum.merge(&other.sum);
        self.sumsq.merge(&other.sumsq);
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.sum.value() / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.mean();
        ((self.sumsq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Lebesgue-typical pair of summary numbers with their Monte Carlo error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl From<&Moments> for MeanEstimate {
    fn from(m: &Moments) -> Self {
        MeanEstimate {
            mean: m.mean(),
            stderr: m.stderr(),
            samples: m.count,
        }
    }
}
