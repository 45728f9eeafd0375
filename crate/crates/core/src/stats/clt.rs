//! Birkhoff averages and the central limit diagnostic for the central Jacobian φ^c.
//!
//! S_nφ^c only sees the coarse itinerary, which is i.i.d. under Lebesgue (α with mass
//! ma), so these estimators sample classes directly.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::maps::MapParams;
use crate::numerics::Rational;
use crate::stats::{run_chunks, Moments};

/// S_nφ^c / log m = #β − #α over n steps.
fn coarse_sum<R: Rng>(rng: &mut R, ma: f64, n: usize) -> i64 {
    let mut alphas = 0i64;
    for _ in 0..n {
        if rng.gen::<f64>() < ma {
            alphas += 1;
        }
    }
    n as i64 - 2 * alphas
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffAverage {
    pub n: usize,
    pub samples: u64,
    pub mean: f64,
    pub stderr: f64,
    /// (1 − 2ma) log m.
    pub limit: f64,
}

/// Mean over Lebesgue points of S_nφ^c / n.
pub fn birkhoff_average(params: &MapParams, n: usize, samples: usize, seed: u64) -> Result<BirkhoffAverage> {
    if samples < 2 || n == 0 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.min(n),
        });
    }
    let ma = params.ma().to_f64();
    let ln_m = params.ln_m();
    let parts = run_chunks(samples, seed, |rng, count| {
        let mut acc = Moments::default();
        for _ in 0..count {
            acc.push(coarse_sum(rng, ma, n) as f64 * ln_m / n as f64);
        }
        acc
    });
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(BirkhoffAverage {
        n,
        samples: total.count,
        mean: total.mean(),
        stderr: total.stderr(),
        limit: (1.0 - 2.0 * ma) * ln_m,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltSummary {
    pub n: usize,
    pub samples: u64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    /// v(φ^c) = ∫|φ^c|² = (log m)².
    pub target_variance: f64,
    pub relative_variance_error: f64,
    /// Kolmogorov–Smirnov distance to the normal law with the sample mean and variance.
    pub ks_statistic: f64,
    /// True when a ≠ 1/(2m) and the drift n(1 − 2ma) log m was subtracted first.
    pub recentered: bool,
}

/// Distribution of S_nφ^c/√n over Lebesgue-sampled points.
pub fn clt_diagnostic(params: &MapParams, n: usize, samples: usize, seed: u64) -> Result<CltSummary> {
    if samples < 2 || n == 0 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.min(n),
        });
    }
    let ma = params.ma().to_f64();
    let ln_m = params.ln_m();
    let recentered = params.ma() * Rational::integer(2) != Rational::one();
    let drift = if recentered {
        n as f64 * (1.0 - 2.0 * ma) * ln_m
    } else {
        0.0
    };
    let root = (n as f64).sqrt();
    let parts = run_chunks(samples, seed, |rng, count| {
        (0..count)
            .map(|_| (coarse_sum(rng, ma, n) as f64 * ln_m - drift) / root)
            .collect::<Vec<f64>>()
    });
    let mut values: Vec<f64> = parts.into_iter().flatten().collect();
    let mut acc = Moments::default();
    for &v in &values {
        acc.push(v);
    }
    let target = ln_m * ln_m;
    let variance = acc.variance();
    values.sort_by(f64::total_cmp);
    let ks = if variance > 0.0 {
        let normal = Normal::new(acc.mean(), variance.sqrt()).expect("positive variance");
        let k = values.len() as f64;
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let c = normal.cdf(v);
                (c - i as f64 / k).abs().max((c - (i + 1) as f64 / k).abs())
            })
            .fold(0.0, f64::max)
    } else {
        1.0
    };
    Ok(CltSummary {
        n,
        samples: acc.count,
        mean: acc.mean(),
        mean_stderr: acc.stderr(),
        variance,
        target_variance: target,
        relative_variance_error: (variance - target).abs() / target,
        ks_statistic: ks,
        recentered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::q;

    #[test]
    fn birkhoff_average_near_limit() {
        let p = MapParams::planar(2, q(1, 6)).unwrap();
        let b = birkhoff_average(&p, 2000, 2000, 1).unwrap();
        assert!((b.limit - 2f64.ln() / 3.0).abs() < 1e-15);
        assert!((b.mean - b.limit).abs() < 0.01);
    }

    #[test]
    fn neutral_case_is_centered() {
        let p = MapParams::planar(2, q(1, 4)).unwrap();
        let c = clt_diagnostic(&p, 1000, 4000, 2).unwrap();
        assert!(!c.recentered);
        assert!(c.mean.abs() < 3.0 * c.mean_stderr);
        assert!(c.relative_variance_error < 0.1);
        assert!(c.ks_statistic < 0.05);
    }

    #[test]
    fn off_center_is_recentered() {
        let p = MapParams::planar(2, q(1, 6)).unwrap();
        let c = clt_diagnostic(&p, 1000, 4000, 3).unwrap();
        assert!(c.recentered);
        assert!(c.mean.abs() < 3.0 * c.mean_stderr);
        // i.i.d. classes with P(α) = 1/3 give variance 4·(1/3)(2/3)(log 2)².
        let iid = 8.0 / 9.0 * 2f64.ln().powi(2);
        assert!((c.variance - iid).abs() / iid < 0.1);
    }
}
