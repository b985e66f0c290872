//! Current symbols and the spectral tags they carry.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    F,
    K1,
    K2,
    E,
}

impl Kind {
    /// F currents sort first, then all K currents, then E.
    pub fn group(self) -> u8 {
        match self {
            Kind::F => 0,
            Kind::K1 | Kind::K2 => 1,
            Kind::E => 2,
        }
    }

    pub fn is_k(self) -> bool {
        self.group() == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pm {
    Plus,
    Minus,
}

impl Pm {
    /// `+1` for `+`, `-1` for `-`.
    pub fn sigma(self) -> f64 {
        match self {
            Pm::Plus => 1.0,
            Pm::Minus => -1.0,
        }
    }
}

/// `table[base] + shift · q`, compared exactly by `(base, shift)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tag {
    pub base: usize,
    pub shift: i32,
}

impl Tag {
    pub fn new(base: usize, shift: i32) -> Self {
        Tag { base, shift }
    }

    pub fn shifted(self, by: i32) -> Self {
        Tag { base: self.base, shift: self.shift + by }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub kind: Kind,
    pub sign: Pm,
    pub tag: Tag,
    pub inverted: bool,
}

impl Symbol {
    pub fn new(kind: Kind, sign: Pm, tag: Tag) -> Self {
        Symbol { kind, sign, tag, inverted: false }
    }

    pub fn k1(sign: Pm, tag: Tag) -> Self {
        Symbol::new(Kind::K1, sign, tag)
    }

    pub fn k2(sign: Pm, tag: Tag) -> Self {
        Symbol::new(Kind::K2, sign, tag)
    }

    pub fn e(sign: Pm, tag: Tag) -> Self {
        Symbol::new(Kind::E, sign, tag)
    }

    pub fn f(sign: Pm, tag: Tag) -> Self {
        Symbol::new(Kind::F, sign, tag)
    }

    /// The inverse of a K symbol.
    ///
    /// # Panics
    /// If the symbol is an E or F current.
    pub fn inverse(self) -> Self {
        assert!(self.kind.is_k(), "only K currents can be inverted");
        Symbol { inverted: !self.inverted, ..self }
    }

    /// Same sign and tag, different kind.
    pub fn with_kind(self, kind: Kind) -> Self {
        Symbol { kind, inverted: false, ..self }
    }

    fn key(&self) -> (u8, Pm, Tag, Kind, bool) {
        (self.kind.group(), self.sign, self.tag, self.kind, self.inverted)
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Normal order: F, then K (by sign, tag, then K1 before K2), then E.
impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            Kind::F => "f",
            Kind::K1 => "k1",
            Kind::K2 => "k2",
            Kind::E => "e",
        };
        let sign = match self.sign {
            Pm::Plus => "+",
            Pm::Minus => "-",
        };
        let inv = if self.inverted { "^-1" } else { "" };
        write!(f, "{name}{sign}(u{}{:+}q){inv}", self.tag.base, self.tag.shift)
    }
}

/// Numeric values behind tags: `value(tag) = values[base] + shift · q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagTable {
    pub values: Vec<C64>,
    pub q: C64,
}

impl TagTable {
    pub fn new(values: Vec<C64>, q: C64) -> Self {
        TagTable { values, q }
    }

    /// Table whose quantum is `ħ c / 4`.
    pub fn with_charge(values: Vec<C64>, hbar: C64, c: C64) -> Self {
        TagTable { values, q: hbar * c / 4.0 }
    }

    pub fn value(&self, tag: Tag) -> C64 {
        self.values[tag.base] + self.q * tag.shift as f64
    }

    pub fn contains(&self, tag: Tag) -> bool {
        tag.base < self.values.len()
    }

    /// Argument of the left R-matrix for the pair `(x, y)`: `(x − σ_x q) − (y − σ_y q)`.
    pub fn delta_left(&self, x: &Symbol, y: &Symbol) -> C64 {
        (self.value(x.tag) - self.q * x.sign.sigma()) - (self.value(y.tag) - self.q * y.sign.sigma())
    }

    /// Argument of the right R-matrix for the pair `(x, y)`: `(x + σ_x q) − (y + σ_y q)`.
    pub fn delta_right(&self, x: &Symbol, y: &Symbol) -> C64 {
        (self.value(x.tag) + self.q * x.sign.sigma()) - (self.value(y.tag) + self.q * y.sign.sigma())
    }
}
