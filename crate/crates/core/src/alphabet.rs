//! The 2m-letter alphabet D = {α₁…α_m, β₁…β_m} and its coarse classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    Alpha,
    Beta,
}

impl Class {
    pub fn letter(self) -> char {
        match self {
            Class::Alpha => 'a',
            Class::Beta => 'b',
        }
    }

    /// Coefficient of log m in the central Jacobian.
    pub fn jacobian_sign(self) -> i64 {
        match self {
            Class::Alpha => -1,
            Class::Beta => 1,
        }
    }
}

/// One letter of D; `index` runs over 1..=m.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub kind: Class,
    pub index: u32,
}

impl Symbol {
    pub fn alpha(index: u32) -> Self {
        Symbol {
            kind: Class::Alpha,
            index,
        }
    }

    pub fn beta(index: u32) -> Self {
        Symbol {
            kind: Class::Beta,
            index,
        }
    }

    pub fn is_alpha(self) -> bool {
        self.kind == Class::Alpha
    }

    pub fn is_beta(self) -> bool {
        self.kind == Class::Beta
    }

    /// ρ: α_i ↔ β_i.
    pub fn partner(self) -> Self {
        match self.kind {
            Class::Alpha => Symbol::beta(self.index),
            Class::Beta => Symbol::alpha(self.index),
        }
    }

    /// α₁…α_m followed by β₁…β_m.
    pub fn all(m: u32) -> Vec<Symbol> {
        (1..=m)
            .map(Symbol::alpha)
            .chain((1..=m).map(Symbol::beta))
            .collect()
    }

    pub fn fits(self, m: u32) -> bool {
        (1..=m).contains(&self.index)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.index)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::ParseWord(s.to_string());
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('a') | Some('α') => Class::Alpha,
            Some('b') | Some('β') => Class::Beta,
            _ => return Err(bad()),
        };
        let index: u32 = chars.as_str().parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        Ok(Symbol { kind, index })
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated word such as `a1,b2,b1`. The empty string is the empty word.
pub fn parse_symbols(s: &str) -> Result<Vec<Symbol>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(str::parse).collect()
}

pub fn format_symbols(w: &[Symbol]) -> String {
    w.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
