//! Noncommutative polynomials in current symbols.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::symbols::Symbol;
use crate::C64;

pub type Word = Vec<Symbol>;

/// Relative threshold below which coefficients are dropped.
pub const PRUNE_RELATIVE: f64 = 1e-14;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NCPoly {
    terms: BTreeMap<Word, C64>,
}

impl NCPoly {
    pub fn zero() -> Self {
        NCPoly::default()
    }

    pub fn scalar(c: C64) -> Self {
        NCPoly::term(c, Vec::new())
    }

    pub fn one() -> Self {
        NCPoly::scalar(C64::new(1.0, 0.0))
    }

    pub fn sym(s: Symbol) -> Self {
        NCPoly::term(C64::new(1.0, 0.0), vec![s])
    }

    pub fn term(c: C64, w: Word) -> Self {
        let mut p = NCPoly::zero();
        p.add_term(w, c);
        p
    }

    pub fn word(symbols: &[Symbol]) -> Self {
        NCPoly::term(C64::new(1.0, 0.0), symbols.to_vec())
    }

    pub fn add_term(&mut self, w: Word, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.terms.entry(w).or_insert(C64::new(0.0, 0.0));
        *slot += c;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| *c == C64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &[Symbol]) -> C64 {
        self.terms.get(w).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: C64) -> NCPoly {
        let mut out = NCPoly::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v * c);
        }
        out
    }

    /// Drops terms below `rel · reference` (exact zeros always go).
    pub fn pruned(&self, rel: f64, reference: f64) -> NCPoly {
        let cut = rel * reference;
        NCPoly {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > cut && **c != C64::new(0.0, 0.0))
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }

    /// Largest coefficient of `self − other`.
    pub fn distance(&self, other: &NCPoly) -> f64 {
        (self - other).max_coeff()
    }

    pub fn into_terms(self) -> BTreeMap<Word, C64> {
        self.terms
    }
}

impl From<BTreeMap<Word, C64>> for NCPoly {
    fn from(terms: BTreeMap<Word, C64>) -> Self {
        NCPoly { terms }
    }
}

impl Add for &NCPoly {
    type Output = NCPoly;
    fn add(self, rhs: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }
}

impl Sub for &NCPoly {
    type Output = NCPoly;
    fn sub(self, rhs: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), -c);
        }
        out
    }
}

impl Neg for &NCPoly {
    type Output = NCPoly;
    fn neg(self) -> NCPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &NCPoly {
    type Output = NCPoly;
    fn mul(self, rhs: &NCPoly) -> NCPoly {
        let mut out = NCPoly::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &rhs.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(w, c1 * c2);
            }
        }
        out
    }
}

impl Add for NCPoly {
    type Output = NCPoly;
    fn add(self, rhs: NCPoly) -> NCPoly {
        &self + &rhs
    }
}

impl Sub for NCPoly {
    type Output = NCPoly;
    fn sub(self, rhs: NCPoly) -> NCPoly {
        &self - &rhs
    }
}

impl Mul for NCPoly {
    type Output = NCPoly;
    fn mul(self, rhs: NCPoly) -> NCPoly {
        &self * &rhs
    }
}

pub fn word_string(w: &[Symbol]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(w, c)| format!("({:.6e}{:+.6e}i) {}", c.re, c.im, word_string(w))).collect();
        f.write_str(&parts.join(" + "))
    }
}
