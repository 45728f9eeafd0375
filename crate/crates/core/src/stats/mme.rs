//! The two measures of maximal entropy ν_α, ν_β of the Dyck shift, realized as Lebesgue
//! pushforwards of codings at the parameters (c₁, c₂).

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Class, Symbol};
use crate::dyck::{dyck_involution_window, DyckWord, Side};
use crate::error::{Error, Result};
use crate::maps::{BakerMap, MapParams};
use crate::numerics::Rational;
use crate::stats::sampler::OrbitSampler;
use crate::stats::{chunk_rng, run_chunks, NeumaierSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MmeTag {
    Alpha,
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MmeVariant {
    pub tag: MmeTag,
    pub side: Side,
}

impl MmeVariant {
    pub fn new(tag: MmeTag, side: Side) -> Self {
        MmeVariant { tag, side }
    }
}

/// Node budget for exhaustive cylinder enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 50_000_000;

fn sample_with<R: rand::Rng>(variant: MmeVariant, sampler: &OrbitSampler, rng: &mut R, length: usize) -> Result<DyckWord> {
    if length == 0 {
        return Ok(DyckWord::new(Vec::new()));
    }
    match (variant.tag, variant.side) {
        (MmeTag::Beta, Side::One) => Ok(DyckWord::new(sampler.sample_symbols(rng, length))),
        (MmeTag::Beta, Side::Two) => {
            let past = length / 2;
            sampler.sample_window(rng, past, length - past)
        }
        (MmeTag::Alpha, side) => {
            // ι_D sends origin o of a length-L window to L − 1 − o.
            let want = match side {
                Side::One => 0,
                Side::Two => length / 2,
            };
            let past = length - 1 - want;
            let beta = sampler.sample_window(rng, past, length - past)?;
            Ok(dyck_involution_window(&beta))
        }
    }
}

fn beta_sampler(m: u32) -> Result<OrbitSampler> {
    Ok(OrbitSampler::new(&MapParams::mme_beta(m)?))
}

/// One ν-typical word of the given length: the itinerary of a Lebesgue point under g_{c₁}
/// (backward symbols from the a.e. inverse), or ι_D of such a window for ν_α.
pub fn mme_sample(variant: MmeVariant, m: u32, length: usize, seed: u64) -> Result<DyckWord> {
    let sampler = beta_sampler(m)?;
    sample_with(variant, &sampler, &mut chunk_rng(seed, 0), length)
}

pub fn mme_samples(variant: MmeVariant, m: u32, length: usize, count: usize, seed: u64) -> Result<Vec<DyckWord>> {
    let sampler = beta_sampler(m)?;
    let parts = run_chunks(count, seed, |rng, n| {
        (0..n)
            .map(|_| sample_with(variant, &sampler, rng, length))
            .collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Exact ν[w] from the cylinder of f_{c₁}; ν_α[w] = ν_β[ρ*(w)].
pub fn mme_cylinder(variant: MmeVariant, m: u32, w: &[Symbol]) -> Result<Rational> {
    if let Some(s) = w.iter().find(|s| !s.fits(m)) {
        return Err(Error::InvalidParams(format!("symbol {s} does not fit m = {m}")));
    }
    let word: Vec<Symbol> = match variant.tag {
        MmeTag::Beta => w.to_vec(),
        MmeTag::Alpha => w.iter().rev().map(|s| s.partner()).collect(),
    };
    let map = BakerMap::new(&MapParams::planar(m, MapParams::c1(m))?);
    Ok(map
        .cylinder_rect(&word)
        .map(|r| r.measure())
        .unwrap_or_else(Rational::zero))
}

/// ν_β[w] = c₁^{#α}(1 − mc₁)^{#β} m^{−u} where u counts the β's that read digits of y_0;
/// `None` for inadmissible words.
pub fn beta_cylinder_exponents(w: &[Symbol]) -> Option<(u32, u32, u32)> {
    let mut open: Vec<u32> = Vec::new();
    let (mut alphas, mut betas, mut unmatched) = (0, 0, 0);
    for s in w {
        match s.kind {
            Class::Alpha => {
                alphas += 1;
                open.push(s.index);
            }
            Class::Beta => {
                betas += 1;
                match open.pop() {
                    Some(i) if i == s.index => {}
                    Some(_) => return None,
                    None => unmatched += 1,
                }
            }
        }
    }
    Some((alphas, betas, unmatched))
}

struct Enumerator<'a> {
    m: u32,
    ln_alpha: f64,
    ln_beta: f64,
    ln_m: f64,
    nmax: usize,
    budget: usize,
    nodes: &'a AtomicUsize,
    sums: Vec<NeumaierSum>,
    counts: Vec<u64>,
    open: Vec<u32>,
}

impl Enumerator<'_> {
    fn visit(&mut self, depth: usize, alphas: u32, betas: u32, unmatched: u32) -> Result<()> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        let ln = alphas as f64 * self.ln_alpha + betas as f64 * self.ln_beta - unmatched as f64 * self.ln_m;
        self.sums[depth].add(-ln.exp() * ln);
        self.counts[depth] += 1;
        if depth == self.nmax {
            return Ok(());
        }
        for i in 1..=self.m {
            self.open.push(i);
            self.visit(depth + 1, alphas + 1, betas, unmatched)?;
            self.open.pop();
        }
        match self.open.last().copied() {
            Some(top) => {
                self.open.pop();
                self.visit(depth + 1, alphas, betas + 1, unmatched)?;
                self.open.push(top);
            }
            None => {
                for _ in 1..=self.m {
                    self.visit(depth + 1, alphas, betas + 1, unmatched + 1)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    /// block[n] = H_n for n = 0..=nmax.
    pub block: Vec<f64>,
    /// words[n] = number of admissible words of length n.
    pub words: Vec<u64>,
}

/// H_n = −Σ_{|w|=n} ν(w) log ν(w) for n ≤ nmax by exhaustive enumeration of admissible
/// words. ρ* permutes words of each length, so ν_α and ν_β give the same numbers.
pub fn entropy_profile(variant: MmeVariant, m: u32, nmax: usize, budget: usize) -> Result<EntropyProfile> {
    let _ = variant;
    let c1 = MapParams::c1(m);
    let beta_width = Rational::one() - Rational::integer(m as i64) * &c1;
    let nodes = AtomicUsize::new(1);
    let first: Vec<Symbol> = Symbol::all(m);
    let parts: Vec<Result<(Vec<NeumaierSum>, Vec<u64>)>> = first
        .par_iter()
        .map(|&s| {
            let mut e = Enumerator {
                m,
                ln_alpha: c1.ln(),
                ln_beta: beta_width.ln(),
                ln_m: (m as f64).ln(),
                nmax,
                budget,
                nodes: &nodes,
                sums: vec![NeumaierSum::default(); nmax + 1],
                counts: vec![0; nmax + 1],
                open: Vec::new(),
            };
            if nmax > 0 {
                match s.kind {
                    Class::Alpha => {
                        e.open.push(s.index);
                        e.visit(1, 1, 0, 0)?;
                    }
                    Class::Beta => e.visit(1, 0, 1, 1)?,
                }
            }
            Ok((e.sums, e.counts))
        })
        .collect();
    let mut block = vec![NeumaierSum::default(); nmax + 1];
    let mut words = vec![0u64; nmax + 1];
    words[0] = 1;
    for p in parts {
        let (sums, counts) = p?;
        for d in 0..=nmax {
            block[d].merge(&sums[d]);
            words[d] += counts[d];
        }
    }
    Ok(EntropyProfile {
        block: block.iter().map(NeumaierSum::value).collect(),
        words,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub n: usize,
    pub block_entropy: f64,
    /// H_{n+1} − H_n.
    pub conditional: f64,
    pub words: u64,
    /// log(m + 1), the topological entropy.
    pub target: f64,
}

pub fn entropy_estimate(variant: MmeVariant, m: u32, n: usize, budget: usize) -> Result<EntropyEstimate> {
    let p = entropy_profile(variant, m, n + 1, budget)?;
    Ok(EntropyEstimate {
        n,
        block_entropy: p.block[n],
        conditional: p.block[n + 1] - p.block[n],
        words: p.words[n],
        target: ((m + 1) as f64).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyck::is_admissible_symbols;
    use crate::numerics::q;

    const BETA1: MmeVariant = MmeVariant {
        tag: MmeTag::Beta,
        side: Side::One,
    };

    fn words(m: u32, len: usize) -> Vec<Vec<Symbol>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    Symbol::all(m).into_iter().map(move |s| {
                        let mut v = w.clone();
                        v.push(s);
                        v
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn single_symbol_masses() {
        let b = |i| Symbol::beta(i);
        let a = |i| Symbol::alpha(i);
        assert_eq!(mme_cylinder(BETA1, 2, &[b(1)]).unwrap(), q(1, 3));
        assert_eq!(mme_cylinder(BETA1, 2, &[a(1)]).unwrap(), q(1, 6));
        let alpha = MmeVariant::new(MmeTag::Alpha, Side::One);
        assert_eq!(mme_cylinder(alpha, 2, &[a(1)]).unwrap(), q(1, 3));
        for m in [2u32, 3] {
            let total: Rational = Symbol::all(m)
                .iter()
                .map(|&s| mme_cylinder(BETA1, m, &[s]).unwrap())
                .sum();
            assert_eq!(total, Rational::one());
        }
    }

    #[test]
    fn exponent_formula_matches_geometry() {
        let c1 = q(1, 6);
        let bw = q(2, 3);
        for len in 0..=5 {
            for w in words(2, len) {
                let exact = mme_cylinder(BETA1, 2, &w).unwrap();
                let fast = match beta_cylinder_exponents(&w) {
                    None => Rational::zero(),
                    Some((i, j, u)) => c1.pow(i) * bw.pow(j) / Rational::integer(1 << u),
                };
                assert_eq!(exact, fast, "{w:?}");
                assert_eq!(exact.is_positive(), is_admissible_symbols(&w));
            }
        }
    }

    #[test]
    fn kolmogorov_consistency() {
        for variant in [BETA1, MmeVariant::new(MmeTag::Alpha, Side::One)] {
            for len in 0..=3 {
                for w in words(2, len) {
                    let parent = mme_cylinder(variant, 2, &w).unwrap();
                    let children: Rational = Symbol::all(2)
                        .into_iter()
                        .map(|s| {
                            let mut v = w.clone();
                            v.push(s);
                            mme_cylinder(variant, 2, &v).unwrap()
                        })
                        .sum();
                    assert_eq!(parent, children);
                }
            }
        }
    }

    #[test]
    fn samples_are_admissible_with_correct_frequencies() {
        for variant in [
            BETA1,
            MmeVariant::new(MmeTag::Beta, Side::Two),
            MmeVariant::new(MmeTag::Alpha, Side::One),
            MmeVariant::new(MmeTag::Alpha, Side::Two),
        ] {
            let ws = mme_samples(variant, 2, 9, 30000, 4).unwrap();
            let mut counts = std::collections::HashMap::new();
            for w in &ws {
                assert!(crate::dyck::is_admissible(w));
                assert_eq!(w.len(), 9);
                *counts.entry(w.at(0).unwrap()).or_insert(0usize) += 1;
            }
            for s in Symbol::all(2) {
                let want = mme_cylinder(variant, 2, &[s]).unwrap().to_f64();
                let got = counts.get(&s).copied().unwrap_or(0) as f64 / ws.len() as f64;
                let se = (want * (1.0 - want) / ws.len() as f64).sqrt();
                assert!((got - want).abs() < 4.0 * se, "{variant:?} {s}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn entropy_sums_and_first_block() {
        let p = entropy_profile(BETA1, 2, 6, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let h1 = -(2.0 * (1.0 / 6.0) * (1.0f64 / 6.0).ln() + 2.0 * (1.0 / 3.0) * (1.0f64 / 3.0).ln());
        assert!((p.block[1] - h1).abs() < 1e-12);
        for n in 0..=6 {
            let brute = words(2, n).iter().filter(|w| is_admissible_symbols(w)).count();
            assert_eq!(p.words[n], brute as u64);
        }
        let mut prev = f64::INFINITY;
        for n in 1..6 {
            let c = p.block[n + 1] - p.block[n];
            assert!(c <= prev + 1e-12);
            assert!(c >= 3f64.ln() - 1e-12);
            prev = c;
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            entropy_profile(BETA1, 2, 8, 1000),
            Err(Error::BudgetExceeded { budget: 1000 })
        ));
    }
}
