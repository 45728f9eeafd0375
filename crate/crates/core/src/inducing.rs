//! Cutting times, the stopping time R (geometric and symbolic), Q, the induced map
//! f^R, its partition, χ(a) and exact tail measures |{R = n}|.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Class, Symbol};
use crate::error::{Error, Result};
use crate::maps::{BakerMap, MapParams};
use crate::numerics::{Interval, Point2, Rational, Rect2};

/// A word over the coarse classes {α, β}.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoarseWord(pub Vec<Class>);

impl CoarseWord {
    pub fn from_symbols(w: &[Symbol]) -> Self {
        CoarseWord(w.iter().map(|s| s.kind).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn alphas(&self) -> usize {
        self.0.iter().filter(|&&c| c == Class::Alpha).count()
    }

    pub fn betas(&self) -> usize {
        self.len() - self.alphas()
    }

    /// Coefficient of log m in S_nφ^c over the whole word.
    pub fn birkhoff(&self) -> i64 {
        self.0.iter().map(|c| c.jacobian_sign()).sum()
    }
}

impl fmt::Display for CoarseWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{}", c.letter())?;
        }
        Ok(())
    }
}

impl FromStr for CoarseWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'a' | 'α' => Ok(Class::Alpha),
                'b' | 'β' => Ok(Class::Beta),
                _ => Err(Error::ParseWord(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(CoarseWord)
    }
}

impl Serialize for CoarseWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Result of a capped stopping-time computation. `ExceededCap` is an outcome, not an error:
/// {R = ∞} has positive measure when a > 1/(2m).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StoppingTime {
    Finite(usize),
    ExceededCap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolicTime {
    Finite(usize),
    NeedMoreSymbols,
}

fn target(first: Class) -> i64 {
    match first {
        Class::Alpha => -1,
        Class::Beta => 0,
    }
}

/// R from the coarse itinerary: the first n with S_n at the target level (−1 after an
/// α start, 0 after a β start) followed by two β symbols, plus 2.
pub fn stopping_time_symbolic(w: &[Class]) -> SymbolicTime {
    let Some(&first) = w.first() else {
        return SymbolicTime::NeedMoreSymbols;
    };
    let t = target(first);
    let mut s = 0i64;
    for n in 0..w.len().saturating_sub(1) {
        if s == t && w[n] == Class::Beta && w[n + 1] == Class::Beta {
            return SymbolicTime::Finite(n + 2);
        }
        s += w[n].jacobian_sign();
    }
    SymbolicTime::NeedMoreSymbols
}

/// Q on [0,1]² \ E: the first n ≥ 1 with S_n at the target level and w_n = β.
pub fn q_time(w: &[Class]) -> Result<SymbolicTime> {
    let Some(&first) = w.first() else {
        return Ok(SymbolicTime::NeedMoreSymbols);
    };
    if first == Class::Beta {
        match w.get(1) {
            None => return Ok(SymbolicTime::NeedMoreSymbols),
            Some(Class::Beta) => return Err(Error::InsideE),
            _ => {}
        }
    }
    let t = target(first);
    let mut s = first.jacobian_sign();
    for (n, &c) in w.iter().enumerate().skip(1) {
        if s == t && c == Class::Beta {
            return Ok(SymbolicTime::Finite(n));
        }
        s += c.jacobian_sign();
    }
    Ok(SymbolicTime::NeedMoreSymbols)
}

/// Tracks the y-side of K_n(p) along an orbit and reports cutting times.
#[derive(Clone, Debug)]
pub struct CuttingTimeTracker<'a> {
    map: &'a BakerMap,
    /// y-extent of f^n(K_n(p)).
    image: Interval,
    steps: usize,
}

impl<'a> CuttingTimeTracker<'a> {
    pub fn new(map: &'a BakerMap) -> Self {
        CuttingTimeTracker {
            map,
            image: Interval::unit(),
            steps: 0,
        }
    }

    /// Advances by the symbol of the current orbit point and returns the ratio
    /// |K_{n+1}|_y / |K_n|_y.
    pub fn step(&mut self, s: Symbol) -> Rational {
        let b = self.map.branch(s);
        self.steps += 1;
        if self.image.is_subset_of(&b.domain.y) {
            self.image = b.fy.image(&self.image);
            return Rational::one();
        }
        let cut = self
            .image
            .intersect(&b.domain.y)
            .expect("the orbit point lies in both intervals");
        let ratio = cut.length() / self.image.length();
        self.image = b.fy.image(&cut);
        ratio
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// R(p) as the least cutting time n ≥ 2, found from the shrinking of K_n(p).
pub fn stopping_time_geometric(map: &BakerMap, p: &Point2, cap: usize) -> Result<StoppingTime> {
    let cut = Rational::recip_of(map.m() as u64);
    let mut tracker = CuttingTimeTracker::new(map);
    let mut q = p.clone();
    for step in 0..cap {
        if map.on_boundary(&q) {
            return Err(Error::BoundaryHit { step });
        }
        let s = map.label(&q);
        let ratio = tracker.step(s);
        if step >= 1 && ratio == cut {
            return Ok(StoppingTime::Finite(step + 1));
        }
        q = map.branch(s).apply(&q);
    }
    Ok(StoppingTime::ExceededCap)
}

/// Geometric stopping time computed from a precomputed itinerary.
pub fn stopping_time_geometric_word(map: &BakerMap, w: &[Symbol]) -> StoppingTime {
    let cut = Rational::recip_of(map.m() as u64);
    let mut tracker = CuttingTimeTracker::new(map);
    for (step, &s) in w.iter().enumerate() {
        if tracker.step(s) == cut && step >= 1 {
            return StoppingTime::Finite(step + 1);
        }
    }
    StoppingTime::ExceededCap
}

/// K_n(p): the maximal rectangle around p on which fⁿ is affine.
pub fn max_affine_rect(map: &BakerMap, p: &Point2, n: usize) -> Result<Rect2> {
    let w = map.itinerary(p, n)?;
    Ok(map.cylinder_rect(&w).expect("the cylinder of an itinerary contains its point"))
}

pub fn induced_apply(map: &BakerMap, p: &Point2, cap: usize) -> Result<Point2> {
    match stopping_time_geometric(map, p, cap)? {
        StoppingTime::Finite(r) => {
            let mut q = p.clone();
            for _ in 0..r {
                q = map.apply2(&q);
            }
            Ok(q)
        }
        StoppingTime::ExceededCap => Err(Error::ExceededCap { cap }),
    }
}

/// One coarse first-passage word together with the fine elements it aggregates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InducedElement {
    pub coarse_word: CoarseWord,
    pub return_time: usize,
    /// Π over classes of m·a (α) or 1 − m·a (β).
    pub x_measure: Rational,
    pub y_height: Rational,
    /// Number of fine cylinders sharing the coarse word.
    pub multiplicity: u64,
}

impl InducedElement {
    pub fn starts_alpha(&self) -> bool {
        self.coarse_word.0[0] == Class::Alpha
    }

    /// x-width of one fine element: a^{#α}(1 − ma)^{#β}.
    pub fn fine_x_measure(&self, params: &MapParams) -> Rational {
        let beta = Rational::one() - params.ma();
        params.a.pow(self.coarse_word.alphas() as u32) * beta.pow(self.coarse_word.betas() as u32)
    }

    /// Lebesgue measure of one fine element.
    pub fn element_measure(&self, params: &MapParams) -> Rational {
        self.fine_x_measure(params) * &self.y_height
    }

    /// Total measure of all fine elements with this coarse word.
    pub fn total_measure(&self) -> Rational {
        self.x_measure.clone()
    }

    /// Exact check of |element| ≤ exp(−χ(a)(R − 2)) = (a(1 − ma))^{(R−2)/2}, squared.
    pub fn satisfies_area_bound(&self, params: &MapParams) -> bool {
        let e = self.element_measure(params);
        let base = chi(params).log_argument;
        &e * &e <= base.pow(self.return_time as u32 - 2)
    }
}

/// All coarse first-passage words with R ≤ max_r, ordered by R then word.
pub fn enumerate_partition(params: &MapParams, max_r: usize) -> Vec<InducedElement> {
    let m = params.m as u64;
    let p = params.ma();
    let q = Rational::one() - &p;
    let mut out = Vec::new();
    let mut word = Vec::new();
    fn walk(
        word: &mut Vec<Class>,
        max_r: usize,
        out: &mut Vec<(Vec<Class>, usize)>,
    ) {
        if let SymbolicTime::Finite(r) = stopping_time_symbolic(word) {
            out.push((word.clone(), r));
            return;
        }
        if word.len() >= max_r {
            return;
        }
        for c in [Class::Alpha, Class::Beta] {
            word.push(c);
            walk(word, max_r, out);
            word.pop();
        }
    }
    let mut raw = Vec::new();
    walk(&mut word, max_r, &mut raw);
    for (w, r) in raw {
        let cw = CoarseWord(w);
        let (na, nb) = (cw.alphas() as u32, cw.betas() as u32);
        let alpha_start = cw.0[0] == Class::Alpha;
        let (y_height, mult) = if alpha_start {
            (Rational::recip_of(m), m.pow(na + 1))
        } else {
            (Rational::recip_of(m * m), m.pow(na + 2))
        };
        out.push(InducedElement {
            x_measure: p.pow(na) * q.pow(nb),
            return_time: r,
            coarse_word: cw,
            y_height,
            multiplicity: mult,
        });
    }
    out.sort_by(|a, b| (a.return_time, &a.coarse_word).cmp(&(b.return_time, &b.coarse_word)));
    out
}

/// The fine elements of a coarse word: nonempty cylinders of the compatible D-words.
pub fn fine_elements(map: &BakerMap, coarse: &CoarseWord) -> Vec<(Vec<Symbol>, Rect2)> {
    let m = map.m();
    let mut out = Vec::new();
    fn go(
        map: &BakerMap,
        m: u32,
        coarse: &[Class],
        cursor: crate::maps::CylinderCursor<'_>,
        word: &mut Vec<Symbol>,
        out: &mut Vec<(Vec<Symbol>, Rect2)>,
    ) {
        if word.len() == coarse.len() {
            out.push((word.clone(), cursor.cylinder.clone()));
            return;
        }
        for i in 1..=m {
            let s = Symbol {
                kind: coarse[word.len()],
                index: i,
            };
            if let Some(next) = cursor.push(s) {
                word.push(s);
                go(map, m, coarse, next, word, out);
                word.pop();
            }
        }
    }
    go(
        map,
        m,
        &coarse.0,
        crate::maps::CylinderCursor::new(map),
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Exact |{R = n}| for n = 0..=nmax (entries 0 and 1 are zero).
pub fn tail_measures(params: &MapParams, nmax: usize) -> Vec<Rational> {
    let p = params.ma();
    let q = Rational::one() - &p;
    let mut out = vec![Rational::zero(); nmax + 1];
    for first in [Class::Alpha, Class::Beta] {
        let t = target(first);
        // State after k symbols: (S_k, pending) where pending means S_{k−1} = t and
        // w_{k−1} = β, so a β now completes the event with R = k + 1.
        let offset = nmax as i64 + 1;
        let width = 2 * offset as usize + 1;
        let idx = |s: i64, pend: bool| (s + offset) as usize * 2 + pend as usize;
        let mut cur = vec![Rational::zero(); width * 2];
        let (w0, s1) = match first {
            Class::Alpha => (p.clone(), -1),
            Class::Beta => (q.clone(), 1),
        };
        let pend0 = 0 == t && first == Class::Beta;
        cur[idx(s1, pend0)] = w0;
        for k in 1..nmax {
            let mut next = vec![Rational::zero(); width * 2];
            for s in -(k as i64)..=(k as i64) {
                for pend in [false, true] {
                    let mass = &cur[idx(s, pend)];
                    if mass.is_zero() {
                        continue;
                    }
                    // β at position k.
                    if pend {
                        out[k + 1] += &(mass * &q);
                    } else {
                        let np = s == t;
                        let slot = &mut next[idx(s + 1, np)];
                        *slot += &(mass * &q);
                    }
                    // α at position k.
                    let slot = &mut next[idx(s - 1, false)];
                    *slot += &(mass * &p);
                }
            }
            cur = next;
        }
    }
    out
}

pub fn tail_measure(params: &MapParams, n: usize) -> Rational {
    tail_measures(params, n).swap_remove(n)
}

/// ∫R dLeb in closed form, finite exactly when a < 1/(2m).
///
/// With p = ma, q = 1 − p and drift μ = q − p > 0, E_A is the mean of the remaining
/// time after a return to the target level that is not followed by ββ.
pub fn mean_return_time(params: &MapParams) -> Option<Rational> {
    let p = params.ma();
    let one = Rational::one();
    let q = &one - &p;
    let mu = &q - &p;
    if !mu.is_positive() {
        return None;
    }
    let two = Rational::integer(2);
    let e_a = (&two * &p * &q + &p * (&one + mu.recip().ok()?)) / (&one - &q * &p - &p);
    let r = &p * (Rational::integer(3) + &e_a) + &q * (&two + &p * (&two + &e_a));
    Some(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chi {
    /// a(1 − ma), so that χ = −½ log of it.
    pub log_argument: Rational,
    pub chi: f64,
    /// √(4m)·e^{−χ(a)}.
    pub decay_base: f64,
}

pub fn chi(params: &MapParams) -> Chi {
    let arg = &params.a * (Rational::one() - params.ma());
    let chi = -0.5 * arg.to_f64().ln();
    let base = (4.0 * params.m as f64 * arg.to_f64()).sqrt();
    Chi {
        log_argument: arg,
        chi,
        decay_base: base,
    }
}

/// n^{−3/2}(√(4m)e^{−χ(a)})ⁿ.
pub fn tail_bound(params: &MapParams, n: usize) -> f64 {
    let base = chi(params).decay_base;
    (n as f64).powf(-1.5) * base.powi(n as i32)
}

/// Exact test of |{R = n+2}| ≤ n^{−3/2}(4m·a(1−ma))^{n/2}, compared after squaring.
pub fn tail_bound_holds(params: &MapParams, tail_n_plus_2: &Rational, n: usize) -> bool {
    let arg = chi(params).log_argument * Rational::integer(4 * params.m as i64);
    let lhs = tail_n_plus_2 * tail_n_plus_2 * Rational::from(BigInt::from(n).pow(3));
    lhs <= arg.pow(n as u32)
}

/// Least n₀ ≥ 1 such that the tail bound holds for every n in n₀..=nmax.
pub fn least_n0(params: &MapParams, nmax: usize) -> Option<usize> {
    let tails = tail_measures(params, nmax + 2);
    let mut n0 = None;
    for n in (1..=nmax).rev() {
        if tail_bound_holds(params, &tails[n + 2], n) {
            n0 = Some(n);
        } else {
            break;
        }
    }
    n0
}
