//! Exact rational scalars and axis-aligned intervals, rectangles and blocks.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Rational(BigRational);

// BigRational orders by continued-fraction expansion, which is slow on the long
// dyadic denominators of deep orbits. Denominators are positive, so cross-multiply.
impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0.denom() == other.0.denom() {
            return self.0.numer().cmp(other.0.numer());
        }
        (self.0.numer() * other.0.denom()).cmp(&(other.0.numer() * self.0.denom()))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom.into())))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `1/n`.
    pub fn recip_of(n: u64) -> Self {
        assert!(n != 0, "recip_of(0)");
        Rational(BigRational::new(BigInt::one(), BigInt::from(n)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn pow(&self, exp: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), exp as usize))
    }

    /// Explicit conversion to a float; the only bridge from exact to sampled values.
    pub fn to_f64(&self) -> f64 {
        if let Some(v) = self.0.to_f64() {
            if v.is_finite() && (v != 0.0 || self.is_zero()) {
                return v;
            }
        }
        // Very large numerators/denominators: scale by bit lengths first.
        let n = self.numer();
        let d = self.denom();
        let shift = n.bits() as i64 - d.bits() as i64;
        let (nn, dd) = if shift > 0 {
            (n.clone(), d << (shift as usize))
        } else {
            (n << ((-shift) as usize), d.clone())
        };
        let mantissa = BigRational::new(nn, dd).to_f64().unwrap_or(0.0);
        mantissa * 2f64.powi(shift.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// Natural logarithm of a positive rational, computed from the bit lengths so
    /// it stays finite for values far below `f64::MIN_POSITIVE`.
    pub fn ln(&self) -> f64 {
        assert!(self.is_positive(), "ln of a nonpositive rational");
        let v = self.to_f64();
        if v.is_normal() {
            return v.ln();
        }
        ln_bigint(self.numer()) - ln_bigint(self.denom())
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn min<'a>(&'a self, other: &'a Rational) -> &'a Rational {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max<'a>(&'a self, other: &'a Rational) -> &'a Rational {
        if self >= other {
            self
        } else {
            other
        }
    }
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap().abs().ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift as usize).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }
}

impl From<BigUint> for Rational {
    fn from(n: BigUint) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let t = s.trim();
        let (p, q) = match t.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (t, "1"),
        };
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(p, q)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $f(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$f(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $f(self, rhs: Rational) -> Rational {
                Rational(self.0.$f(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $f(self, rhs: &Rational) -> Rational {
                Rational(self.0.$f(&rhs.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $f(self, rhs: Rational) -> Rational {
                Rational((&self.0).$f(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
// Panics on a zero divisor, like integer division; use `checked_div` for fallible input.
binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// `x ↦ slope·x + offset` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine1 {
    pub slope: Rational,
    pub offset: Rational,
}

impl Affine1 {
    pub fn new(slope: Rational, offset: Rational) -> Result<Self> {
        if slope.is_zero() {
            return Err(Error::DegenerateMap);
        }
        Ok(Affine1 { slope, offset })
    }

    pub fn identity() -> Self {
        Affine1 {
            slope: Rational::one(),
            offset: Rational::zero(),
        }
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.offset
    }

    pub fn inverse(&self) -> Affine1 {
        let s = self.slope.recip().expect("affine slope is nonzero");
        let o = -(&self.offset * &s);
        Affine1 { slope: s, offset: o }
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Affine1) -> Affine1 {
        Affine1 {
            slope: &self.slope * &inner.slope,
            offset: &self.slope * &inner.offset + &self.offset,
        }
    }

    pub fn image(&self, i: &Interval) -> Interval {
        i.map_affine(self)
    }
}

/// Interval with independent endpoint closure flags; `[lo, hi)` by default.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    /// `[lo, hi)`.
    pub fn half_open(lo: Rational, hi: Rational) -> Self {
        Interval::new(lo, hi, true, false)
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Interval::new(lo, hi, true, true)
    }

    pub fn open(lo: Rational, hi: Rational) -> Self {
        Interval::new(lo, hi, false, false)
    }

    pub fn unit() -> Self {
        Interval::closed(Rational::zero(), Rational::one())
    }

    pub fn length(&self) -> Rational {
        if self.hi > self.lo {
            &self.hi - &self.lo
        } else {
            Rational::zero()
        }
    }

    pub fn has_positive_length(&self) -> bool {
        self.hi > self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let lo_ok = match x.cmp(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        let hi_ok = match x.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }

    pub fn interior(&self) -> Interval {
        Interval::open(self.lo.clone(), self.hi.clone())
    }

    /// Exact intersection; `None` when the result has zero or negative length.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        if hi > lo {
            Some(Interval::new(lo, hi, lo_closed, hi_closed))
        } else {
            None
        }
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok = match self.lo.cmp(&other.lo) {
            Ordering::Greater => true,
            Ordering::Equal => other.lo_closed || !self.lo_closed,
            Ordering::Less => false,
        };
        let hi_ok = match self.hi.cmp(&other.hi) {
            Ordering::Less => true,
            Ordering::Equal => other.hi_closed || !self.hi_closed,
            Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }

    fn map_affine(&self, f: &Affine1) -> Interval {
        let a = f.apply(&self.lo);
        let b = f.apply(&self.hi);
        if f.slope.is_positive() {
            Interval::new(a, b, self.lo_closed, self.hi_closed)
        } else {
            Interval::new(b, a, self.hi_closed, self.lo_closed)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// `{slope·x + offset : x ∈ I}` with endpoints reordered for negative slopes.
pub fn affine_image(i: &Interval, slope: &Rational, offset: &Rational) -> Result<Interval> {
    let f = Affine1::new(slope.clone(), offset.clone())?;
    Ok(i.map_affine(&f))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect2 {
    pub x: Interval,
    pub y: Interval,
}

impl Rect2 {
    pub fn new(x: Interval, y: Interval) -> Self {
        Rect2 { x, y }
    }

    pub fn unit() -> Self {
        Rect2::new(Interval::unit(), Interval::unit())
    }

    pub fn measure(&self) -> Rational {
        self.x.length() * self.y.length()
    }

    pub fn intersect(&self, other: &Rect2) -> Option<Rect2> {
        Some(Rect2::new(
            self.x.intersect(&other.x)?,
            self.y.intersect(&other.y)?,
        ))
    }

    pub fn contains(&self, p: &Point2) -> bool {
        self.x.contains(&p.x) && self.y.contains(&p.y)
    }

    pub fn interior(&self) -> Rect2 {
        Rect2::new(self.x.interior(), self.y.interior())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block3 {
    pub x: Interval,
    pub y: Interval,
    pub z: Interval,
}

impl Block3 {
    pub fn new(x: Interval, y: Interval, z: Interval) -> Self {
        Block3 { x, y, z }
    }

    pub fn unit() -> Self {
        Block3::new(Interval::unit(), Interval::unit(), Interval::unit())
    }

    pub fn measure(&self) -> Rational {
        self.x.length() * self.y.length() * self.z.length()
    }

    pub fn intersect(&self, other: &Block3) -> Option<Block3> {
        Some(Block3::new(
            self.x.intersect(&other.x)?,
            self.y.intersect(&other.y)?,
            self.z.intersect(&other.z)?,
        ))
    }

    pub fn contains(&self, p: &Point3) -> bool {
        self.x.contains(&p.x) && self.y.contains(&p.y) && self.z.contains(&p.z)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point2 {
    pub x: Rational,
    pub y: Rational,
}

impl Point2 {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point2 { x, y }
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [self.x.to_f64(), self.y.to_f64()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point3 {
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
}

impl Point3 {
    pub fn new(x: Rational, y: Rational, z: Rational) -> Self {
        Point3 { x, y, z }
    }

    pub fn xy(&self) -> Point2 {
        Point2::new(self.x.clone(), self.y.clone())
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.x.to_f64(), self.y.to_f64(), self.z.to_f64()]
    }
}

/// Shorthand for literal rationals in code and tests. Panics on a zero denominator.
pub fn q(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom).expect("nonzero denominator")
}
