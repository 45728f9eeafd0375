//! The Dyck monoid with zero: reduction, admissibility, Hamming metrics, ρ* and heights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alphabet::{format_symbols, parse_symbols, Class, Symbol};
use crate::error::{Error, Result};

/// A finite word over D. `origin` is the array index of coordinate 0, so a
/// two-sided window covers coordinates `-origin .. len - origin`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyckWord {
    pub symbols: Vec<Symbol>,
    #[serde(default)]
    pub origin: usize,
}

impl DyckWord {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        DyckWord { symbols, origin: 0 }
    }

    pub fn with_origin(symbols: Vec<Symbol>, origin: usize) -> Result<Self> {
        if origin >= symbols.len().max(1) {
            return Err(Error::MisalignedWindows(format!(
                "origin {origin} beyond window of length {}",
                symbols.len()
            )));
        }
        Ok(DyckWord { symbols, origin })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol at coordinate `i` (may be negative for two-sided windows).
    pub fn at(&self, i: i64) -> Option<Symbol> {
        let k = i + self.origin as i64;
        if k < 0 {
            return None;
        }
        self.symbols.get(k as usize).copied()
    }

    /// Coordinates covered by the window.
    pub fn coordinates(&self) -> std::ops::Range<i64> {
        -(self.origin as i64)..(self.symbols.len() - self.origin) as i64
    }

    pub fn forward(&self) -> &[Symbol] {
        &self.symbols[self.origin..]
    }

    pub fn backward(&self) -> &[Symbol] {
        &self.symbols[..self.origin]
    }

    pub fn fits(&self, m: u32) -> bool {
        self.symbols.iter().all(|s| s.fits(m))
    }
}

impl fmt::Display for DyckWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_symbols(&self.symbols))
    }
}

impl FromStr for DyckWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(DyckWord::new(parse_symbols(s)?))
    }
}

/// red(w): the unit, the zero, or a β-run followed by an α-run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ReducedForm {
    Unit,
    Zero,
    Normal { betas: Vec<Symbol>, alphas: Vec<Symbol> },
}

impl ReducedForm {
    fn from_parts(betas: Vec<Symbol>, alphas: Vec<Symbol>) -> Self {
        if betas.is_empty() && alphas.is_empty() {
            ReducedForm::Unit
        } else {
            ReducedForm::Normal { betas, alphas }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ReducedForm::Zero)
    }

    /// The word β…βα…α representing this form; `None` for the zero.
    pub fn to_word(&self) -> Option<Vec<Symbol>> {
        match self {
            ReducedForm::Unit => Some(Vec::new()),
            ReducedForm::Zero => None,
            ReducedForm::Normal { betas, alphas } => {
                Some(betas.iter().chain(alphas.iter()).copied().collect())
            }
        }
    }
}

impl fmt::Display for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReducedForm::Unit => f.write_str("unit"),
            ReducedForm::Zero => f.write_str("zero"),
            ReducedForm::Normal { betas, alphas } => {
                let parts: Vec<String> = betas.iter().chain(alphas).map(|s| s.to_string()).collect();
                f.write_str(&parts.join("."))
            }
        }
    }
}

impl Serialize for ReducedForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Left-to-right stack reduction that can be extended one symbol at a time.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Reducer {
    betas: Vec<Symbol>,
    stack: Vec<Symbol>,
    zero: bool,
}

impl Reducer {
    pub fn new() -> Self {
        Reducer::default()
    }

    pub fn push(&mut self, s: Symbol) {
        if self.zero {
            return;
        }
        match s.kind {
            Class::Alpha => self.stack.push(s),
            Class::Beta => match self.stack.last() {
                Some(top) if top.index == s.index => {
                    self.stack.pop();
                }
                Some(_) => self.zero = true,
                None => self.betas.push(s),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Number of unmatched α-symbols (the open brackets).
    pub fn open_alphas(&self) -> usize {
        self.stack.len()
    }

    pub fn unmatched_betas(&self) -> usize {
        self.betas.len()
    }

    pub fn top_alpha(&self) -> Option<Symbol> {
        self.stack.last().copied()
    }

    pub fn form(&self) -> ReducedForm {
        if self.zero {
            ReducedForm::Zero
        } else {
            ReducedForm::from_parts(self.betas.clone(), self.stack.clone())
        }
    }
}

pub fn reduce_symbols(w: &[Symbol]) -> ReducedForm {
    let mut r = Reducer::new();
    for &s in w {
        r.push(s);
        if r.is_zero() {
            break;
        }
    }
    r.form()
}

pub fn reduce(w: &DyckWord) -> ReducedForm {
    reduce_symbols(&w.symbols)
}

/// Zero is absorbing, so a word is admissible exactly when the whole word reduces to nonzero.
pub fn is_admissible(w: &DyckWord) -> bool {
    !reduce(w).is_zero()
}

pub fn is_admissible_symbols(w: &[Symbol]) -> bool {
    !reduce_symbols(w).is_zero()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    One,
    Two,
}

/// exp(−first mismatch index); two-sided windows look at ±i simultaneously.
pub fn hamming_distance(w: &DyckWord, v: &DyckWord, side: Side) -> Result<f64> {
    if w.len() != v.len() || w.origin != v.origin {
        return Err(Error::MisalignedWindows(format!(
            "lengths {} and {}, origins {} and {}",
            w.len(),
            v.len(),
            w.origin,
            v.origin
        )));
    }
    let reach = match side {
        Side::One => (w.len() - w.origin) as i64,
        Side::Two => w.origin.max(w.len() - w.origin) as i64,
    };
    for i in 0..reach {
        let fwd = w.at(i) != v.at(i);
        let bwd = side == Side::Two && i > 0 && w.at(-i) != v.at(-i);
        if fwd || bwd {
            return Ok((-(i as f64)).exp());
        }
    }
    Ok(0.0)
}

/// ρ* on finite words: reverse and swap α_i ↔ β_i. The result is a one-sided word.
pub fn dyck_involution(w: &DyckWord) -> DyckWord {
    DyckWord::new(w.symbols.iter().rev().map(|s| s.partner()).collect())
}

/// ι_D on a two-sided window: coordinate i of the result is ρ(w_{−i}).
pub fn dyck_involution_window(w: &DyckWord) -> DyckWord {
    let symbols: Vec<Symbol> = w.symbols.iter().rev().map(|s| s.partner()).collect();
    let origin = if w.symbols.is_empty() {
        0
    } else {
        w.symbols.len() - 1 - w.origin
    };
    DyckWord { symbols, origin }
}

/// H_0 … H_n over the forward part of the window.
pub fn height_profile(w: &DyckWord) -> Vec<i64> {
    let mut h = 0i64;
    let mut out = Vec::with_capacity(w.len() - w.origin + 1);
    out.push(0);
    for s in w.forward() {
        h -= s.kind.jacobian_sign();
        out.push(h);
    }
    out
}

/// (i, H_i) for every coordinate boundary of a two-sided window, i from −origin to len − origin.
pub fn two_sided_heights(w: &DyckWord) -> Vec<(i64, i64)> {
    let mut back = Vec::with_capacity(w.origin);
    let mut h = 0i64;
    for (k, s) in w.backward().iter().enumerate().rev() {
        h += s.kind.jacobian_sign();
        back.push((k as i64 - w.origin as i64, h));
    }
    back.reverse();
    back.extend(
        height_profile(w)
            .into_iter()
            .enumerate()
            .map(|(i, h)| (i as i64, h)),
    );
    back
}

/// Finite-window summary of the height profile; a diagnostic, not a classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightTrend {
    pub forward_end: i64,
    pub backward_end: i64,
    pub forward_slope: f64,
    pub backward_slope: f64,
}

pub fn height_trend(w: &DyckWord) -> HeightTrend {
    let hs = two_sided_heights(w);
    let (first, last) = (hs[0], hs[hs.len() - 1]);
    let fwd_len = last.0.max(1) as f64;
    let bwd_len = (-first.0).max(1) as f64;
    HeightTrend {
        forward_end: last.1,
        backward_end: first.1,
        forward_slope: last.1 as f64 / fwd_len,
        backward_slope: first.1 as f64 / bwd_len,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> DyckWord {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&w("a1,b1")), ReducedForm::Unit);
        assert_eq!(reduce(&w("a1,b2")), ReducedForm::Zero);
        assert_eq!(reduce(&w("b2,a1,a1,b1")).to_string(), "b2.a1");
        assert_eq!(reduce(&w("")), ReducedForm::Unit);
        assert_eq!(reduce(&w("b1,b2,a2")).to_string(), "b1.b2.a2");
    }

    #[test]
    fn admissibility_examples() {
        assert!(!is_admissible(&w("a1,b2")));
        assert!(is_admissible(&w("b1,b1,b1")));
        assert!(is_admissible(&w("a1,a2,b2,b1")));
        assert!(!is_admissible(&w("a1,a2,b1,b2")));
    }

    #[test]
    fn hamming_examples() {
        let a = w("a1,b1,a2");
        assert_eq!(hamming_distance(&a, &w("b1,b1,a2"), Side::One).unwrap(), 1.0);
        assert_eq!(
            hamming_distance(&a, &w("a1,b1,a1"), Side::One).unwrap(),
            (-2f64).exp()
        );
        assert_eq!(hamming_distance(&a, &a, Side::One).unwrap(), 0.0);
        assert!(hamming_distance(&a, &w("a1"), Side::One).is_err());
        let l = DyckWord::with_origin(parse_symbols("a1,a2,b2,b1,a1").unwrap(), 2).unwrap();
        let r = DyckWord::with_origin(parse_symbols("a2,a2,b2,b1,a1").unwrap(), 2).unwrap();
        assert_eq!(hamming_distance(&l, &r, Side::Two).unwrap(), (-2f64).exp());
        assert_eq!(hamming_distance(&l, &r, Side::One).unwrap(), 0.0);
    }

    #[test]
    fn involution_examples() {
        assert_eq!(dyck_involution(&w("a1,b1")), w("a1,b1"));
        assert_eq!(dyck_involution(&w("a1,a2")), w("b2,b1"));
        let t = DyckWord::with_origin(parse_symbols("a1,b2,a2").unwrap(), 1).unwrap();
        let it = dyck_involution_window(&t);
        for i in t.coordinates() {
            assert_eq!(it.at(-i), t.at(i).map(Symbol::partner));
        }
        assert_eq!(dyck_involution_window(&it), t);
    }

    #[test]
    fn height_examples() {
        assert_eq!(height_profile(&w("a1,a1,b1")), vec![0, 1, 2, 1]);
        assert_eq!(height_profile(&w("")), vec![0]);
        assert_eq!(height_profile(&w("b1,b2,b1")), vec![0, -1, -2, -3]);
        let t = DyckWord::with_origin(parse_symbols("a1,b2,a2").unwrap(), 2).unwrap();
        // Negative coordinates count +1 per β and −1 per α between i and −1.
        assert_eq!(two_sided_heights(&t), vec![(-2, 0), (-1, 1), (0, 0), (1, 1)]);
    }

    fn all_words(m: u32, n: usize) -> Vec<Vec<Symbol>> {
        let d = Symbol::all(m);
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|w| {
                    d.iter().map(move |&s| {
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
    fn involution_preserves_admissibility_exhaustive() {
        // Depth-first over admissible prefixes only, so length 12 stays tractable.
        fn dfs(prefix: &mut Vec<Symbol>, r: &Reducer, depth: usize, count: &mut [u64]) {
            count[prefix.len()] += 1;
            let inv = dyck_involution(&DyckWord::new(prefix.clone()));
            assert!(is_admissible(&inv), "{:?}", prefix);
            if prefix.len() == depth {
                return;
            }
            for s in Symbol::all(2) {
                let mut next = r.clone();
                next.push(s);
                if !next.is_zero() {
                    prefix.push(s);
                    dfs(prefix, &next, depth, count);
                    prefix.pop();
                }
            }
        }
        let mut count = vec![0u64; 13];
        dfs(&mut Vec::new(), &Reducer::new(), 12, &mut count);
        assert_eq!(&count[..4], &[1, 4, 14, 48]);
        for n in 4..12 {
            let ratio = count[n + 1] as f64 / count[n] as f64;
            assert!(ratio > 3.0 && ratio < count[n] as f64 / count[n - 1] as f64 + 1e-12);
        }
    }

    #[test]
    fn factor_closure_exhaustive() {
        for word in all_words(2, 6) {
            if is_admissible_symbols(&word) {
                for i in 0..word.len() {
                    for j in i..=word.len() {
                        assert!(is_admissible_symbols(&word[i..j]));
                    }
                }
            }
        }
    }

    fn symbol() -> impl Strategy<Value = Symbol> {
        (any::<bool>(), 1u32..=2).prop_map(|(a, i)| if a { Symbol::alpha(i) } else { Symbol::beta(i) })
    }

    fn admissible_word(max: usize) -> impl Strategy<Value = Vec<Symbol>> {
        prop::collection::vec(symbol(), 0..max).prop_map(|v| {
            let mut r = Reducer::new();
            let mut out = Vec::new();
            for s in v {
                let mut n = r.clone();
                n.push(s);
                if n.is_zero() {
                    n = r.clone();
                    n.push(s.partner());
                    out.push(s.partner());
                } else {
                    out.push(s);
                }
                r = n;
            }
            out
        })
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(v in prop::collection::vec(symbol(), 0..30)) {
            let r = reduce_symbols(&v);
            if let Some(word) = r.to_word() {
                prop_assert_eq!(reduce_symbols(&word), r);
            }
        }

        #[test]
        fn reduction_is_a_morphism(u in prop::collection::vec(symbol(), 0..20), v in prop::collection::vec(symbol(), 0..20)) {
            let whole: Vec<Symbol> = u.iter().chain(v.iter()).copied().collect();
            let expect = match (reduce_symbols(&u).to_word(), reduce_symbols(&v).to_word()) {
                (Some(a), Some(b)) => reduce_symbols(&[a, b].concat()),
                _ => ReducedForm::Zero,
            };
            prop_assert_eq!(reduce_symbols(&whole), expect);
        }

        #[test]
        fn long_admissible_words_stay_admissible_under_rho(word in admissible_word(200)) {
            prop_assert!(is_admissible_symbols(&word));
            let inv = dyck_involution(&DyckWord::new(word));
            prop_assert!(is_admissible(&inv));
        }

        #[test]
        fn normal_form_shape(v in prop::collection::vec(symbol(), 0..30)) {
            if let ReducedForm::Normal { betas, alphas } = reduce_symbols(&v) {
                prop_assert!(betas.iter().all(|s| s.is_beta()));
                prop_assert!(alphas.iter().all(|s| s.is_alpha()));
            }
        }
    }
}
