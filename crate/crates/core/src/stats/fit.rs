//! Log-linear decay-rate fits that refuse to fit below the noise floor.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::correlation::CorrelationSeries;

/// Estimates smaller than this many standard errors are treated as noise.
pub const SIGNAL_THRESHOLD: f64 = 5.0;
pub const MIN_USABLE_LAGS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// λ = exp(slope).
    pub rate: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// r² of log(estimate) against log(lag) on the same lags (lag 0 excluded), for
    /// comparing with polynomial decay.
    pub power_law_r2: f64,
    pub usable_lags: Vec<usize>,
    pub window: (usize, usize),
}

/// Least-squares fit of log(estimate) against lag over the lags in `window` whose
/// estimate exceeds 5 standard errors.
pub fn fit_decay_rate(series: &CorrelationSeries, window: RangeInclusive<usize>) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut usable = Vec::new();
    for (i, &lag) in series.lags.iter().enumerate() {
        if !window.contains(&lag) {
            continue;
        }
        let e = series.estimates[i];
        if e > 0.0 && e > SIGNAL_THRESHOLD * series.stderrs[i] {
            usable.push(lag);
            xs.push(lag as f64);
            ys.push(e.ln());
        }
    }
    if usable.len() < MIN_USABLE_LAGS {
        return Err(Error::InsufficientUsableLags { found: usable.len() });
    }
    let (slope, intercept, r2) = least_squares(&xs, &ys);
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(&ys)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| (x.ln(), *y))
        .unzip();
    let power_law_r2 = if lx.len() >= 2 { least_squares(&lx, &ly).2 } else { f64::NAN };
    Ok(DecayFit {
        rate: slope.exp(),
        slope,
        intercept,
        r2,
        power_law_r2,
        usable_lags: usable,
        window: (*window.start(), *window.end()),
    })
}

/// Slope, intercept and r² of the ordinary least-squares line.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(usize) -> f64, nmax: usize) -> CorrelationSeries {
        let lags: Vec<usize> = (0..=nmax).collect();
        let estimates: Vec<f64> = lags.iter().map(|&n| f(n)).collect();
        CorrelationSeries {
            stderrs: vec![1e-9; lags.len()],
            signed: estimates.clone(),
            estimates,
            lags,
            samples: 0,
            seed: 0,
        }
    }

    #[test]
    fn exact_exponential() {
        let s = synthetic(|n| 3.0 * 0.5f64.powi(n as i32), 20);
        let f = fit_decay_rate(&s, 0..=20).unwrap();
        assert!((f.rate - 0.5).abs() < 1e-6);
        assert!((f.r2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn power_law_fits_worse() {
        let exp = fit_decay_rate(&synthetic(|n| 2.0 * 0.8f64.powi(n as i32), 25), 1..=25).unwrap();
        let pow = fit_decay_rate(&synthetic(|n| 2.0 * (n as f64).powf(-1.5), 25), 1..=25).unwrap();
        assert!(pow.r2 < exp.r2 - 0.05, "{} vs {}", pow.r2, exp.r2);
        assert!((pow.power_law_r2 - 1.0).abs() < 1e-9);
        assert!(exp.power_law_r2 < exp.r2);
    }

    #[test]
    fn noise_floor_is_respected() {
        let mut s = synthetic(|n| 0.5f64.powi(n as i32), 10);
        s.stderrs = vec![0.05; 11];
        // 0.5^n > 0.25 only for n ≤ 1.
        assert!(matches!(
            fit_decay_rate(&s, 0..=10),
            Err(Error::InsufficientUsableLags { found: 2 })
        ));
        s.stderrs = vec![0.001; 11];
        let f = fit_decay_rate(&s, 0..=10).unwrap();
        assert_eq!(f.usable_lags, (0..=7).collect::<Vec<_>>());
    }
}
