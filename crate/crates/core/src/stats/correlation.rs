//! Correlation and k-point correlation estimators over Lebesgue-random orbits.
//!
//! Observables are centered with their exact means, so each sample contributes
//! Π_j (φ_j∘T^{n_j} − ∫φ_j). For k = 2 this has expectation Cor_n by invariance; for
//! mean-zero observables it is exactly the k-point correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::MapParams;
use crate::stats::observable::Observable;
use crate::stats::sampler::{OrbitSampler, SampledOrbit};
use crate::stats::{run_chunks, Moments};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// |signed|, the quantity in the definition of Cor.
    pub estimate: f64,
    pub signed: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl From<&Moments> for Estimate {
    fn from(m: &Moments) -> Self {
        Estimate {
            estimate: m.mean().abs(),
            signed: m.mean(),
            stderr: m.stderr(),
            samples: m.count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub lags: Vec<usize>,
    pub estimates: Vec<f64>,
    pub signed: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

fn dimension(params: &MapParams) -> usize {
    if params.b.is_some() {
        3
    } else {
        2
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples,
        });
    }
    Ok(())
}

/// |mean(Π φ_j∘T^{n_j}) − Π ∫φ_j| for centered factors, with lags n_0 = 0 ≤ n_1 ≤ ….
pub fn estimate_k_correlation(
    params: &MapParams,
    observables: &[Observable],
    lags: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if observables.len() != lags.len() {
        return Err(Error::LagCountMismatch {
            observables: observables.len(),
            lags: lags.len(),
        });
    }
    if lags.first() != Some(&0) || lags.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedLags);
    }
    check_samples(samples)?;
    let dim = dimension(params);
    for o in observables {
        o.check_arity(dim)?;
    }
    let sampler = OrbitSampler::new(params);
    let len = *lags.last().unwrap();
    let parts = run_chunks(samples, seed, |rng, count| {
        let mut orbit = SampledOrbit::default();
        let mut acc = Moments::default();
        for _ in 0..count {
            sampler.sample_into(rng, len, &mut orbit);
            let v: f64 = observables
                .iter()
                .zip(lags)
                .map(|(o, &n)| o.centered(&orbit.points[n]))
                .product();
            acc.push(v);
        }
        acc
    });
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(Estimate::from(&total))
}

pub fn estimate_correlation(
    params: &MapParams,
    phi: &Observable,
    psi: &Observable,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    estimate_k_correlation(params, &[phi.clone(), psi.clone()], &[0, n], samples, seed)
}

/// Cor_n for every n in 0..=nmax from one batch of orbits of length nmax.
pub fn correlation_series(
    params: &MapParams,
    phi: &Observable,
    psi: &Observable,
    nmax: usize,
    samples: usize,
    seed: u64,
) -> Result<CorrelationSeries> {
    check_samples(samples)?;
    let dim = dimension(params);
    phi.check_arity(dim)?;
    psi.check_arity(dim)?;
    let sampler = OrbitSampler::new(params);
    let parts = run_chunks(samples, seed, |rng, count| {
        let mut orbit = SampledOrbit::default();
        let mut acc = vec![Moments::default(); nmax + 1];
        for _ in 0..count {
            sampler.sample_into(rng, nmax, &mut orbit);
            let head = phi.centered(&orbit.points[0]);
            for (n, a) in acc.iter_mut().enumerate() {
                a.push(head * psi.centered(&orbit.points[n]));
            }
        }
        acc
    });
    let mut total = vec![Moments::default(); nmax + 1];
    for p in &parts {
        for (t, m) in total.iter_mut().zip(p) {
            t.merge(m);
        }
    }
    let est: Vec<Estimate> = total.iter().map(Estimate::from).collect();
    Ok(CorrelationSeries {
        lags: (0..=nmax).collect(),
        estimates: est.iter().map(|e| e.estimate).collect(),
        signed: est.iter().map(|e| e.signed).collect(),
        stderrs: est.iter().map(|e| e.stderr).collect(),
        samples: samples as u64,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::q;

    fn obs(name: &str) -> Observable {
        Observable::builtin(name).unwrap()
    }

    #[test]
    fn constant_observables_give_exact_zero() {
        let p = MapParams::planar(2, q(1, 6)).unwrap();
        let one = Observable::constant(3.0);
        let e = estimate_correlation(&p, &obs("trig1"), &one, 4, 2000, 1).unwrap();
        assert_eq!(e.estimate, 0.0);
        let e = estimate_k_correlation(&p, &[one.clone(), one.clone(), one], &[0, 2, 5], 2000, 1).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn lag_zero_is_the_variance() {
        let p = MapParams::planar(2, q(1, 6)).unwrap();
        let e = estimate_correlation(&p, &obs("x"), &obs("x"), 0, 50000, 2).unwrap();
        assert!((e.signed - 1.0 / 12.0).abs() < 4.0 * e.stderr);
        // wave has variance 1/2 + 1/2.
        let e = estimate_correlation(&p, &obs("wave"), &obs("wave"), 0, 50000, 2).unwrap();
        assert!((e.signed - 1.0).abs() < 4.0 * e.stderr);
    }

    #[test]
    fn k_equals_two_is_the_pair_estimator() {
        let p = MapParams::g(2, q(1, 6)).unwrap();
        let a = estimate_correlation(&p, &obs("trig3"), &obs("trig1"), 3, 5000, 9).unwrap();
        let b = estimate_k_correlation(&p, &[obs("trig3"), obs("trig1")], &[0, 3], 5000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn validation_errors() {
        let p = MapParams::planar(2, q(1, 6)).unwrap();
        let o = obs("trig1");
        assert!(matches!(
            estimate_k_correlation(&p, &[o.clone(), o.clone()], &[0, 3, 4], 100, 1),
            Err(Error::LagCountMismatch { .. })
        ));
        assert!(matches!(
            estimate_k_correlation(&p, &[o.clone(), o.clone(), o.clone()], &[0, 4, 3], 100, 1),
            Err(Error::UnsortedLags)
        ));
        assert!(matches!(
            estimate_k_correlation(&p, &[o.clone(), o.clone()], &[1, 3], 100, 1),
            Err(Error::UnsortedLags)
        ));
        assert!(estimate_correlation(&p, &o, &obs("z"), 1, 100, 1).is_err());
        assert!(estimate_correlation(&p, &o, &o, 1, 0, 1).is_err());
    }

    #[test]
    fn series_is_reproducible_and_decays() {
        let p = MapParams::planar(2, q(1, 6)).unwrap();
        let a = correlation_series(&p, &obs("trig1"), &obs("trig2"), 12, 20000, 5).unwrap();
        let b = correlation_series(&p, &obs("trig1"), &obs("trig2"), 12, 20000, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.estimates[12] < a.estimates[0].max(a.estimates[1]));
    }
}
