//! Exact-in-law orbit sampling for f_a and f_{a,b} under Lebesgue measure.
//!
//! Iterating the maps in floating point is useless after a few dozen steps because τ_a
//! expands. Instead the orbit is generated from its law. For Lebesgue-random x the
//! τ_a-labels are i.i.d. (α_i with mass a each, β with mass 1 − ma) and τ_a^N(x) is
//! uniform and independent of them. So x_N is drawn uniform and x_0..x_{N−1} are
//! recovered through the contracting inverse branches. The y-coordinate is an m-ary
//! digit stack: α_i pushes the digit i − 1, β pops the top digit d and is β_{d+1}.
//! The z-coordinate contracts and is iterated forward.
//!
//! Backward in time the roles swap: z's strips make the classes i.i.d. (α with mass
//! 1 − mb, β_i with mass b each), a backward β_i pushes i − 1 onto y and a backward α
//! pops. Both directions read the same digits of y_0.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Class, Symbol};
use crate::dyck::DyckWord;
use crate::error::{Error, Result};
use crate::inducing::{CuttingTimeTracker, StoppingTime};
use crate::maps::{BakerMap, MapParams};
use crate::numerics::Rational;
use crate::stats::run_chunks;

/// y as a base-m digit stack. The top `digits` digits live in `window`; deeper pushed
/// digits spill onto `spill`; below those are the untouched digits of y_0, drawn fresh.
#[derive(Clone, Debug)]
struct DigitWindow {
    m: u64,
    window: u64,
    top_place: u64,
    spill: Vec<u8>,
}

impl DigitWindow {
    fn digits_for(m: u32) -> u32 {
        let m = m as u64;
        let mut k = 0;
        let mut p: u64 = 1;
        while let Some(next) = p.checked_mul(m) {
            if next > 1 << 63 {
                break;
            }
            p = next;
            k += 1;
        }
        k
    }

    fn fresh<R: Rng>(m: u32, rng: &mut R) -> (Self, f64) {
        let k = Self::digits_for(m);
        let m64 = m as u64;
        let top_place = m64.pow(k - 1);
        let scale = top_place * m64;
        let window = rng.gen_range(0..scale);
        (
            DigitWindow {
                m: m64,
                window,
                top_place,
                spill: Vec::new(),
            },
            scale as f64,
        )
    }

    fn push(&mut self, d: u64) {
        self.spill.push((self.window % self.m) as u8);
        self.window = self.window / self.m + d * self.top_place;
    }

    fn pop<R: Rng>(&mut self, rng: &mut R) -> u64 {
        let d = self.window / self.top_place;
        let lower = match self.spill.pop() {
            Some(v) => v as u64,
            None => rng.gen_range(0..self.m),
        };
        self.window = (self.window % self.top_place) * self.m + lower;
        d
    }
}

/// The digits of y_0 shared by a forward and a backward stack.
#[derive(Clone, Debug, Default)]
struct DigitStream {
    digits: Vec<u8>,
}

impl DigitStream {
    fn get<R: Rng>(&mut self, i: usize, m: u32, rng: &mut R) -> u8 {
        while self.digits.len() <= i {
            self.digits.push(rng.gen_range(0..m) as u8);
        }
        self.digits[i]
    }
}

/// A symbolic digit stack sitting on top of a [`DigitStream`].
#[derive(Clone, Debug, Default)]
struct DigitStack {
    pushed: Vec<u8>,
    cursor: usize,
}

impl DigitStack {
    fn push(&mut self, d: u8) {
        self.pushed.push(d);
    }

    fn pop<R: Rng>(&mut self, stream: &mut DigitStream, m: u32, rng: &mut R) -> u8 {
        match self.pushed.pop() {
            Some(d) => d,
            None => {
                let d = stream.get(self.cursor, m, rng);
                self.cursor += 1;
                d
            }
        }
    }
}

/// Orbit points (x_n, y_n, z_n) for n = 0..=len with the symbols γ_n for n < len.
/// Planar orbits carry z = NaN.
#[derive(Clone, Debug, Default)]
pub struct SampledOrbit {
    pub points: Vec<[f64; 3]>,
    pub symbols: Vec<Symbol>,
}

#[derive(Clone, Debug)]
pub struct OrbitSampler {
    m: u32,
    a: f64,
    ma: f64,
    b: Option<f64>,
}

impl OrbitSampler {
    pub fn new(params: &MapParams) -> Self {
        OrbitSampler {
            m: params.m,
            a: params.a.to_f64(),
            ma: params.ma().to_f64(),
            b: params.b.as_ref().map(Rational::to_f64),
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn is_3d(&self) -> bool {
        self.b.is_some()
    }

    /// Class of a τ-label: α_i with mass a each, otherwise β (index decided by y).
    fn draw_x_label<R: Rng>(&self, rng: &mut R) -> Option<u32> {
        let u: f64 = rng.gen();
        if u < self.ma {
            Some(((u / self.a) as u32 + 1).min(self.m))
        } else {
            None
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, len: usize) -> SampledOrbit {
        let mut out = SampledOrbit::default();
        self.sample_into(rng, len, &mut out);
        out
    }

    /// Fills `out` with an orbit of length `len`, reusing its buffers.
    pub fn sample_into<R: Rng>(&self, rng: &mut R, len: usize, out: &mut SampledOrbit) {
        out.points.clear();
        out.symbols.clear();
        let (mut y, scale) = DigitWindow::fresh(self.m, rng);
        let mut z = match self.b {
            Some(_) => rng.gen::<f64>(),
            None => f64::NAN,
        };
        for _ in 0..len {
            out.points.push([0.0, y.window as f64 / scale, z]);
            let sym = match self.draw_x_label(rng) {
                Some(i) => {
                    y.push(i as u64 - 1);
                    Symbol::alpha(i)
                }
                None => Symbol::beta(y.pop(rng) as u32 + 1),
            };
            if let Some(b) = self.b {
                z = self.z_step(sym, b, z);
            }
            out.symbols.push(sym);
        }
        out.points.push([0.0, y.window as f64 / scale, z]);
        let mut x: f64 = rng.gen();
        out.points[len][0] = x;
        for n in (0..len).rev() {
            x = match out.symbols[n].kind {
                Class::Alpha => self.a * (x + (out.symbols[n].index - 1) as f64),
                Class::Beta => self.ma + (1.0 - self.ma) * x,
            };
            out.points[n][0] = x;
        }
    }

    fn z_step(&self, s: Symbol, b: f64, z: f64) -> f64 {
        let m = self.m as f64;
        match s.kind {
            Class::Alpha => (1.0 - m * b) * z,
            Class::Beta => b * z + 1.0 - b * (m + 1.0 - s.index as f64),
        }
    }

    /// One step of the map in floating point, for validating sampled orbits.
    pub fn apply_float(&self, p: &[f64; 3]) -> ([f64; 3], Symbol) {
        let m = self.m as f64;
        let s = if p[0] < self.ma {
            Symbol::alpha(((p[0] / self.a) as u32 + 1).min(self.m))
        } else {
            Symbol::beta(((p[1] * m) as u32 + 1).min(self.m))
        };
        let i = s.index as f64;
        let (x, y) = match s.kind {
            Class::Alpha => (p[0] / self.a - (i - 1.0), (p[1] + i - 1.0) / m),
            Class::Beta => ((p[0] - self.ma) / (1.0 - self.ma), m * p[1] - (i - 1.0)),
        };
        let z = match self.b {
            Some(b) => self.z_step(s, b, p[2]),
            None => f64::NAN,
        };
        ([x, y, z], s)
    }

    /// The forward itinerary γ_0..γ_{len−1} of a Lebesgue-random point.
    pub fn sample_symbols<R: Rng>(&self, rng: &mut R, len: usize) -> Vec<Symbol> {
        let mut stream = DigitStream::default();
        let mut stack = DigitStack::default();
        (0..len)
            .map(|_| self.forward_symbol(rng, &mut stream, &mut stack))
            .collect()
    }

    fn forward_symbol<R: Rng>(
        &self,
        rng: &mut R,
        stream: &mut DigitStream,
        stack: &mut DigitStack,
    ) -> Symbol {
        match self.draw_x_label(rng) {
            Some(i) => {
                stack.push(i as u8 - 1);
                Symbol::alpha(i)
            }
            None => Symbol::beta(stack.pop(stream, self.m, rng) as u32 + 1),
        }
    }

    /// Symbols at coordinates −past..future of a Lebesgue-random point of [0,1]³,
    /// as a window with origin `past`. Needs the z-coordinate.
    pub fn sample_window<R: Rng>(&self, rng: &mut R, past: usize, future: usize) -> Result<DyckWord> {
        let b = self.b.ok_or(Error::MissingB)?;
        let mut stream = DigitStream::default();
        let mut fwd = DigitStack::default();
        let mut bwd = DigitStack::default();
        let future_syms: Vec<Symbol> = (0..future)
            .map(|_| self.forward_symbol(rng, &mut stream, &mut fwd))
            .collect();
        let alpha_mass = 1.0 - self.m as f64 * b;
        let mut past_syms = Vec::with_capacity(past);
        for _ in 0..past {
            let u: f64 = rng.gen();
            let s = if u < alpha_mass {
                Symbol::alpha(bwd.pop(&mut stream, self.m, rng) as u32 + 1)
            } else {
                let i = (((u - alpha_mass) / b) as u32 + 1).min(self.m);
                bwd.push(i as u8 - 1);
                Symbol::beta(i)
            };
            past_syms.push(s);
        }
        past_syms.reverse();
        past_syms.extend(future_syms);
        if past_syms.is_empty() {
            return Ok(DyckWord::new(past_syms));
        }
        let origin = past.min(past_syms.len() - 1);
        DyckWord::with_origin(past_syms, origin)
    }
}

/// Empirical distribution of R over Lebesgue samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeHistogram {
    /// counts[n] = number of samples with R = n.
    pub counts: Vec<u64>,
    pub exceeded: u64,
    pub samples: u64,
    pub cap: usize,
}

impl ReturnTimeHistogram {
    /// Estimated |{R = n}| and its binomial standard error.
    pub fn frequency(&self, n: usize) -> (f64, f64) {
        let k = self.counts.get(n).copied().unwrap_or(0) as f64;
        let s = self.samples as f64;
        let p = k / s;
        (p, (p * (1.0 - p) / s).sqrt())
    }
}

/// Monte Carlo distribution of the stopping time: sampled itineraries are fed to the
/// exact cutting-time tracker until the first cutting time n ≥ 2 or `cap` steps.
pub fn sample_return_times(params: &MapParams, samples: usize, cap: usize, seed: u64) -> ReturnTimeHistogram {
    let planar = MapParams {
        b: None,
        ..params.clone()
    };
    let map = BakerMap::new(&planar);
    let sampler = OrbitSampler::new(&planar);
    let cut = Rational::recip_of(params.m as u64);
    let parts = run_chunks(samples, seed, |rng, count| {
        let mut counts = vec![0u64; cap + 1];
        let mut exceeded = 0;
        for _ in 0..count {
            let mut stream = DigitStream::default();
            let mut stack = DigitStack::default();
            let mut tracker = CuttingTimeTracker::new(&map);
            let mut r = StoppingTime::ExceededCap;
            for step in 0..cap {
                let s = sampler.forward_symbol(rng, &mut stream, &mut stack);
                if tracker.step(s) == cut && step >= 1 {
                    r = StoppingTime::Finite(step + 1);
                    break;
                }
            }
            match r {
                StoppingTime::Finite(n) => counts[n] += 1,
                StoppingTime::ExceededCap => exceeded += 1,
            }
        }
        (counts, exceeded)
    });
    let mut counts = vec![0u64; cap + 1];
    let mut exceeded = 0;
    for (c, e) in parts {
        for (t, v) in counts.iter_mut().zip(c) {
            *t += v;
        }
        exceeded += e;
    }
    ReturnTimeHistogram {
        counts,
        exceeded,
        samples: samples as u64,
        cap,
    }
}
