//! The Young tower over the inducing base: tower maps G and F, the projection θ, the
//! invariant measure μ, the partitions 𝒟_k, separation times and the lift to the Dyck
//! shift.
//!
//! The tower is never materialized; a tower point is a base point with a floor index.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Class, Symbol};
use crate::dyck::DyckWord;
use crate::error::{Error, Result};
use crate::inducing::{
    mean_return_time, stopping_time_geometric, stopping_time_symbolic, tail_measures, CoarseWord,
    StoppingTime, SymbolicTime,
};
use crate::maps::{dual_apply, BakerMap, MapParams};
use crate::numerics::{Point2, Point3, Rational};
use crate::stats::sampler::{OrbitSampler, SampledOrbit};
use crate::stats::run_chunks;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TowerPoint {
    pub base: Point3,
    pub floor: usize,
}

/// A point of the quotient tower Δ⁺.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuotientPoint {
    pub base: Point2,
    pub floor: usize,
}

impl TowerPoint {
    pub fn new(base: Point3, floor: usize) -> Self {
        TowerPoint { base, floor }
    }

    pub fn project(&self) -> QuotientPoint {
        QuotientPoint {
            base: self.base.xy(),
            floor: self.floor,
        }
    }
}

/// R(p), failing with `ExceededCap` when no cutting time occurs within `cap` steps.
pub fn return_time(map: &BakerMap, p: &Point2, cap: usize) -> Result<usize> {
    match stopping_time_geometric(map, p, cap)? {
        StoppingTime::Finite(r) => Ok(r),
        StoppingTime::ExceededCap => Err(Error::ExceededCap { cap }),
    }
}

fn check_floor(map: &BakerMap, p: &Point2, floor: usize, cap: usize) -> Result<usize> {
    let r = return_time(map, p, cap)?;
    if floor >= r {
        return Err(Error::OutOfDomain(format!("floor {floor} is not below R = {r}")));
    }
    Ok(r)
}

/// G(p, ℓ) = (p, ℓ + 1) below the top floor and (g^R(p), 0) from it.
pub fn tower_apply(map: &BakerMap, w: &TowerPoint, cap: usize) -> Result<TowerPoint> {
    let r = check_floor(map, &w.base.xy(), w.floor, cap)?;
    if w.floor + 1 < r {
        return Ok(TowerPoint::new(w.base.clone(), w.floor + 1));
    }
    let mut p = w.base.clone();
    for _ in 0..r {
        p = map.apply3(&p)?;
    }
    Ok(TowerPoint::new(p, 0))
}

/// F on the quotient tower.
pub fn quotient_apply(map: &BakerMap, w: &QuotientPoint, cap: usize) -> Result<QuotientPoint> {
    let r = check_floor(map, &w.base, w.floor, cap)?;
    if w.floor + 1 < r {
        return Ok(QuotientPoint {
            base: w.base.clone(),
            floor: w.floor + 1,
        });
    }
    let mut p = w.base.clone();
    for _ in 0..r {
        p = map.apply2(&p);
    }
    Ok(QuotientPoint { base: p, floor: 0 })
}

/// θ(p, ℓ) = g^ℓ(p).
pub fn theta(map: &BakerMap, w: &TowerPoint, cap: usize) -> Result<Point3> {
    check_floor(map, &w.base.xy(), w.floor, cap)?;
    let mut p = w.base.clone();
    for _ in 0..w.floor {
        p = map.apply3(&p)?;
    }
    Ok(p)
}

/// θ⁺(p, ℓ) = f^ℓ(p).
pub fn theta_plus(map: &BakerMap, w: &QuotientPoint, cap: usize) -> Result<Point2> {
    check_floor(map, &w.base, w.floor, cap)?;
    let mut p = w.base.clone();
    for _ in 0..w.floor {
        p = map.apply2(&p);
    }
    Ok(p)
}

/// Floor masses |{R > ℓ}| for ℓ < floor_cap with the exact normalizer ∫R dLeb.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerMeasureSpec {
    pub params: MapParams,
    pub floor_masses: Vec<Rational>,
    /// Σ of the listed floor masses.
    pub partial_sum: Rational,
    /// ∫R dLeb = Σ_ℓ |{R > ℓ}|; `None` when it is infinite (a ≥ 1/(2m)).
    pub normalizer: Option<Rational>,
    /// Exact mass of the floors at or above the cap, normalizer − partial_sum.
    pub discarded_mass: Option<Rational>,
    pub normalizable: bool,
}

impl TowerMeasureSpec {
    /// μ(Δ₀) = 1/∫R dLeb.
    pub fn ground_floor_mass(&self) -> Option<Rational> {
        self.normalizer.as_ref().map(|n| n.recip().expect("∫R ≥ 2"))
    }

    /// 1/partial_sum, the ground-floor mass of the truncated tower.
    pub fn truncated_ground_floor_mass(&self) -> Rational {
        self.partial_sum.recip().expect("the ground floor has mass 1")
    }

    /// Exact bound on |1/partial_sum − 1/∫R|: discarded / partial_sum².
    pub fn ground_floor_error_bound(&self) -> Option<Rational> {
        self.discarded_mass
            .as_ref()
            .map(|d| d / &(&self.partial_sum * &self.partial_sum))
    }

    /// μ(Δ_ℓ) for the listed floors.
    pub fn floor_probabilities(&self) -> Option<Vec<Rational>> {
        let n = self.normalizer.as_ref()?;
        Some(self.floor_masses.iter().map(|m| m / n).collect())
    }
}

pub fn tower_measure(params: &MapParams, floor_cap: usize) -> TowerMeasureSpec {
    let planar = MapParams {
        b: None,
        ..params.clone()
    };
    let tails = tail_measures(&planar, floor_cap.max(1));
    let mut masses = Vec::with_capacity(floor_cap);
    let mut remaining = Rational::one();
    for l in 0..floor_cap {
        remaining -= &tails[l];
        masses.push(remaining.clone());
    }
    let partial: Rational = masses.iter().sum();
    let normalizer = mean_return_time(&planar);
    let discarded = normalizer.as_ref().map(|n| n - &partial);
    TowerMeasureSpec {
        params: params.clone(),
        floor_masses: masses,
        partial_sum: partial,
        normalizable: normalizer.is_some(),
        normalizer,
        discarded_mass: discarded,
    }
}

/// The fine partition element of p: its itinerary up to R(p).
pub fn induced_element(map: &BakerMap, p: &Point2, cap: usize) -> Result<Vec<Symbol>> {
    let r = return_time(map, p, cap)?;
    map.itinerary(p, r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparationTime {
    Separated(usize),
    NotSeparatedWithin(usize),
}

/// Least n with (f^R)ⁿ(p), (f^R)ⁿ(p′) in different elements of 𝒫, looking at most `steps`
/// induced steps ahead; `cap` bounds each stopping-time search.
pub fn separation_time(map: &BakerMap, p: &Point2, p2: &Point2, steps: usize, cap: usize) -> Result<SeparationTime> {
    let (mut a, mut b) = (p.clone(), p2.clone());
    for n in 0..steps {
        let wa = induced_element(map, &a, cap)?;
        let wb = induced_element(map, &b, cap)?;
        if wa != wb {
            return Ok(SeparationTime::Separated(n));
        }
        for &s in &wa {
            a = map.branch(s).apply(&a);
            b = map.branch(s).apply(&b);
        }
    }
    Ok(SeparationTime::NotSeparatedWithin(steps))
}

/// s(w, w′) on the quotient tower: 0 across floors, s(p, p′) on a common floor.
pub fn tower_separation_time(
    map: &BakerMap,
    w: &QuotientPoint,
    w2: &QuotientPoint,
    steps: usize,
    cap: usize,
) -> Result<SeparationTime> {
    if w.floor != w2.floor {
        return Ok(SeparationTime::Separated(0));
    }
    separation_time(map, &w.base, &w2.base, steps, cap)
}

/// The 𝒟_k element of a tower point: (floor, fine element of the base) for G^j(w), j < k.
pub fn dk_itinerary(map: &BakerMap, w: &TowerPoint, k: usize, cap: usize) -> Result<Vec<(usize, Vec<Symbol>)>> {
    let mut out = Vec::with_capacity(k);
    let mut cur = w.clone();
    for _ in 0..k {
        out.push((cur.floor, induced_element(map, &cur.base.xy(), cap)?));
        cur = tower_apply(map, &cur, cap)?;
    }
    Ok(out)
}

/// Coarse words with R ≤ max_r whose top floor does not map onto the whole base, i.e.
/// violations of the Markov property of 𝒟₀. Every fine element must be a full branch
/// of f^R.
pub fn markov_violations(params: &MapParams, max_r: usize) -> Vec<CoarseWord> {
    let planar = MapParams {
        b: None,
        ..params.clone()
    };
    let map = BakerMap::new(&planar);
    let unit = crate::numerics::Rect2::unit();
    let mut bad = Vec::new();
    for e in crate::inducing::enumerate_partition(&planar, max_r) {
        let full = crate::inducing::fine_elements(&map, &e.coarse_word).iter().all(|(w, _)| {
            let mut c = crate::maps::CylinderCursor::new(&map);
            for &s in w {
                match c.push(s) {
                    Some(next) => c = next,
                    None => return false,
                }
            }
            c.image.measure() == unit.measure()
        });
        if !full {
            bad.push(e.coarse_word);
        }
    }
    bad
}

/// The coding of a tower point at (m, c₁, c₂): `past` backward and `future` forward
/// symbols of the base, together with the floor. `future` is raised to R(p) if needed.
pub fn dyck_tower_lift(map: &BakerMap, w: &TowerPoint, past: usize, future: usize, cap: usize) -> Result<(DyckWord, usize)> {
    let params = map.params();
    params.b()?;
    let r = check_floor(map, &w.base.xy(), w.floor, cap)?;
    let future = future.max(r);
    let mut symbols = Vec::with_capacity(past + future);
    let mut q = w.base.clone();
    for _ in 0..past {
        q = dual_apply(params, &q)?;
        if map.on_boundary(&q.xy()) {
            return Err(Error::BoundaryHit { step: symbols.len() });
        }
        symbols.push(map.label(&q.xy()));
    }
    symbols.reverse();
    symbols.extend(map.itinerary(&w.base.xy(), future)?);
    Ok((DyckWord::with_origin(symbols, past)?, w.floor))
}

/// R̂(ω) from the coarse forward itinerary.
pub fn symbolic_return_time(w: &DyckWord) -> SymbolicTime {
    let classes: Vec<Class> = w.forward().iter().map(|s| s.kind).collect();
    stopping_time_symbolic(&classes)
}

/// Ĝ on a finite window: climbs a floor or shifts by R̂ and returns to floor 0.
pub fn symbolic_tower_apply(w: &DyckWord, floor: usize) -> Result<(DyckWord, usize)> {
    let r = match symbolic_return_time(w) {
        SymbolicTime::Finite(r) => r,
        SymbolicTime::NeedMoreSymbols => {
            return Err(Error::MisalignedWindows("window too short to determine R̂".into()))
        }
    };
    if floor + 1 < r {
        return Ok((w.clone(), floor + 1));
    }
    let shifted = DyckWord::with_origin(w.symbols.clone(), w.origin + r)?;
    Ok((shifted, 0))
}

/// True when the two windows agree on every coordinate they share.
pub fn windows_agree(a: &DyckWord, b: &DyckWord) -> bool {
    let lo = a.coordinates().start.max(b.coordinates().start);
    let hi = a.coordinates().end.min(b.coordinates().end);
    (lo..hi).all(|i| a.at(i) == b.at(i))
}

/// ν_β{R̂ = n} for n ≤ nmax by exact summation over admissible n-cylinders.
pub fn symbolic_return_time_masses(m: u32, nmax: usize) -> Vec<Rational> {
    let c1 = MapParams::c1(m);
    let bw = Rational::one() - Rational::integer(m as i64) * &c1;
    let inv_m = Rational::recip_of(m as u64);
    let mut out = vec![Rational::zero(); nmax + 1];
    let mut word = Vec::new();
    fn go(
        m: u32,
        nmax: usize,
        word: &mut Vec<Symbol>,
        weights: (&Rational, &Rational, &Rational),
        out: &mut [Rational],
    ) {
        if !word.is_empty() {
            let classes: Vec<Class> = word.iter().map(|s| s.kind).collect();
            if let SymbolicTime::Finite(r) = stopping_time_symbolic(&classes) {
                if let Some((i, j, u)) = crate::stats::mme::beta_cylinder_exponents(word) {
                    out[r] += &(weights.0.pow(i) * weights.1.pow(j) * weights.2.pow(u));
                }
                return;
            }
        }
        if word.len() == nmax {
            return;
        }
        for s in Symbol::all(m) {
            word.push(s);
            if crate::stats::mme::beta_cylinder_exponents(word).is_some() {
                go(m, nmax, word, weights, out);
            }
            word.pop();
        }
    }
    go(m, nmax, &mut word, (&c1, &bw, &inv_m), &mut out);
    out
}

/// A μ-distributed tower point in floating point: the floor is drawn proportionally to
/// the truncated floor masses, then a Lebesgue orbit is accepted when its coarse word has
/// R > ℓ. Returns the floor and θ of the tower point.
pub fn sample_mu<R: Rng>(
    sampler: &OrbitSampler,
    weights: &[f64],
    rng: &mut R,
    orbit: &mut SampledOrbit,
) -> (usize, [f64; 3]) {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut floor = weights.len() - 1;
    for (l, w) in weights.iter().enumerate() {
        if u < *w {
            floor = l;
            break;
        }
        u -= w;
    }
    loop {
        sampler.sample_into(rng, floor, orbit);
        let classes: Vec<Class> = orbit.symbols.iter().map(|s| s.kind).collect();
        if matches!(stopping_time_symbolic(&classes), SymbolicTime::NeedMoreSymbols) {
            return (floor, orbit.points[floor]);
        }
    }
}

/// θ-images of μ-sampled tower points together with their floors.
pub fn sample_mu_pushforward(spec: &TowerMeasureSpec, samples: usize, seed: u64) -> Vec<(usize, [f64; 3])> {
    let params = spec.params.clone();
    let sampler = OrbitSampler::new(&params);
    let weights: Vec<f64> = spec.floor_masses.iter().map(Rational::to_f64).collect();
    run_chunks(samples, seed, |rng, count| {
        let mut orbit = SampledOrbit::default();
        (0..count)
            .map(|_| sample_mu(&sampler, &weights, rng, &mut orbit))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}
