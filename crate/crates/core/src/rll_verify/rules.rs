//! Oriented rewrite rules for adjacent pairs of current symbols.
//!
//! `R_i` is the left R-matrix and `R_j` the right one in `R_i L_1 ϖ L_2 ϖ = ϖ L_2 ϖ L_1 R_j`.
//! For a pair of symbols `(x, y)` taken from `L(u)` and `L(v)` respectively, `R_i` is
//! evaluated at [`TagTable::delta_left`] and `R_j` at [`TagTable::delta_right`].
//! Every rule rewrites a misordered adjacent pair into a combination of words that are
//! smaller in the termination order (E/F inversions, then misordered kind pairs, then
//! misordered tags, then length).

use thiserror::Error;

use super::ncpoly::Word;
use super::symbols::{Kind, Symbol, TagTable};
use crate::rmatrix::{Entry, Grading, PoleError, StructuredR};
use crate::C64;

/// Pairs whose relevant arguments are closer than this are left in place: the
/// relations are singular at coincident arguments.
pub const TAG_SEPARATION: f64 = 1e-4;

pub type Rewrite = Vec<(C64, Word)>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RuleError {
    #[error("rule {rule} at ({x}, {y}): {source}")]
    Pole { rule: &'static str, x: String, y: String, source: PoleError },
    #[error("rule {rule} at ({x}, {y}): vanishing denominator")]
    ZeroDenominator { rule: &'static str, x: String, y: String },
    #[error("tag of {0} is not in the tag table")]
    UnknownTag(String),
}

/// Deliberate corruptions used as negative controls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    /// Replace the `k1 k2` exchange ratio by its reciprocal.
    pub invert_k1k2_ratio: bool,
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct RuleSet {
    ri: StructuredR,
    rj: StructuredR,
    eps: f64,
    table: TagTable,
    faults: Faults,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl RuleSet {
    pub fn new(ri: StructuredR, rj: StructuredR, grading: Grading, table: TagTable) -> Self {
        RuleSet { ri, rj, eps: grading.sign(), table, faults: Faults::default() }
    }

    pub fn with_faults(mut self, faults: Faults) -> Self {
        self.faults = faults;
        self
    }

    pub fn table(&self) -> &TagTable {
        &self.table
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn r_left(&self) -> &StructuredR {
        &self.ri
    }

    pub fn r_right(&self) -> &StructuredR {
        &self.rj
    }

    fn entry(&self, side: Side, e: Entry, z: C64, rule: &'static str, x: &Symbol, y: &Symbol) -> Result<C64, RuleError> {
        let r = match side {
            Side::Left => &self.ri,
            Side::Right => &self.rj,
        };
        r.entry(e, z).map_err(|source| RuleError::Pole { rule, x: x.to_string(), y: y.to_string(), source })
    }

    fn ratio(&self, side: Side, num: Entry, den: Entry, z: C64, rule: &'static str, x: &Symbol, y: &Symbol) -> Result<C64, RuleError> {
        let n = self.entry(side, num, z, rule, x, y)?;
        let d = self.entry(side, den, z, rule, x, y)?;
        if d == C64::new(0.0, 0.0) {
            return Err(RuleError::ZeroDenominator { rule, x: x.to_string(), y: y.to_string() });
        }
        Ok(n / d)
    }

    fn coincident(&self, z: C64) -> bool {
        z.norm() < TAG_SEPARATION
    }

    fn check_tags(&self, p: &Symbol, q: &Symbol) -> Result<(), RuleError> {
        for s in [p, q] {
            if !self.table.contains(s.tag) {
                return Err(RuleError::UnknownTag(s.to_string()));
            }
        }
        Ok(())
    }

    /// Rewrite of the adjacent pair `p q`, or `None` if it is already ordered or stuck.
    pub fn rewrite(&self, p: &Symbol, q: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        self.check_tags(p, q)?;
        if p.kind.is_k() && p.kind == q.kind && p.sign == q.sign && p.tag == q.tag && p.inverted != q.inverted {
            return Ok(Some(vec![(one(), Vec::new())]));
        }
        if p <= q {
            return Ok(None);
        }
        match (p.kind, q.kind) {
            (a, b) if a.is_k() && b.is_k() => self.kk(p, q),
            (Kind::E, Kind::K1) => self.e_k1(p, q),
            (Kind::E, Kind::K2) => self.e_k2(p, q),
            (Kind::K1, Kind::F) => self.k1_f(p, q),
            (Kind::K2, Kind::F) => self.k2_f(p, q),
            (Kind::E, Kind::F) => self.e_f(p, q),
            (Kind::E, Kind::E) => self.e_e(p, q),
            (Kind::F, Kind::F) => self.f_f(p, q),
            _ => unreachable!("misordered pair {p} {q}"),
        }
    }

    /// `P^α Q^β = γ^{αβ} Q^β P^α` where `P Q = γ Q P` for the uninverted symbols.
    fn kk(&self, p: &Symbol, q: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        let (pu, qu) = (Symbol { inverted: false, ..*p }, Symbol { inverted: false, ..*q });
        let (dl, dr) = (self.table.delta_left(&pu, &qu), self.table.delta_right(&pu, &qu));
        if self.coincident(dl) || self.coincident(dr) {
            return Ok(None);
        }
        let rule = "kk";
        let gamma = match (p.kind, q.kind) {
            // a_i k1(x) k1(y) = a_j k1(y) k1(x)
            (Kind::K1, Kind::K1) => {
                self.entry(Side::Right, Entry::A, dr, rule, p, q)? / self.nonzero(Side::Left, Entry::A, dl, rule, p, q)?
            }
            (Kind::K2, Kind::K2) => {
                self.entry(Side::Right, Entry::D, dr, rule, p, q)? / self.nonzero(Side::Left, Entry::D, dl, rule, p, q)?
            }
            // b_i k1(x) k2(y) = b_j k2(y) k1(x)
            (Kind::K2, Kind::K1) => {
                let (dl, dr) = (self.table.delta_left(&qu, &pu), self.table.delta_right(&qu, &pu));
                let g = self.entry(Side::Left, Entry::B, dl, rule, q, p)?
                    / self.nonzero(Side::Right, Entry::B, dr, rule, q, p)?;
                self.fault_k1k2(g)
            }
            (Kind::K1, Kind::K2) => {
                let g = self.entry(Side::Right, Entry::B, dr, rule, p, q)?
                    / self.nonzero(Side::Left, Entry::B, dl, rule, p, q)?;
                self.fault_k1k2(g)
            }
            _ => unreachable!(),
        };
        let power = if p.inverted == q.inverted { 1 } else { -1 };
        let c = if power == 1 { gamma } else { one() / gamma };
        Ok(Some(vec![(c, vec![*q, *p])]))
    }

    fn fault_k1k2(&self, g: C64) -> C64 {
        if self.faults.invert_k1k2_ratio {
            one() / g
        } else {
            g
        }
    }

    fn nonzero(&self, side: Side, e: Entry, z: C64, rule: &'static str, x: &Symbol, y: &Symbol) -> Result<C64, RuleError> {
        let v = self.entry(side, e, z, rule, x, y)?;
        if v == C64::new(0.0, 0.0) {
            return Err(RuleError::ZeroDenominator { rule, x: x.to_string(), y: y.to_string() });
        }
        Ok(v)
    }

    /// `e(y) k1(x) = (a_j/b_j) k1(x) e(y) − (s_j/b_j) k1(x) e(x)`, at `Δ_j(x, y)`.
    fn e_k1(&self, e: &Symbol, k: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        if k.inverted {
            return Ok(None);
        }
        let z = self.table.delta_right(k, e);
        if self.coincident(z) {
            return Ok(None);
        }
        let rule = "e-k1";
        let ab = self.ratio(Side::Right, Entry::A, Entry::B, z, rule, k, e)?;
        let sb = self.ratio(Side::Right, Entry::S, Entry::B, z, rule, k, e)?;
        Ok(Some(vec![(ab, vec![*k, *e]), (-sb, vec![*k, k.with_kind(Kind::E)])]))
    }

    /// `e(x) k2(y) = (d_j/b_j) k2(y) e(x) − ε (t_j/b_j) k2(y) e(y)`, at `Δ_j(x, y)`.
    fn e_k2(&self, e: &Symbol, k: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        if k.inverted {
            return Ok(None);
        }
        let z = self.table.delta_right(e, k);
        if self.coincident(z) {
            return Ok(None);
        }
        let rule = "e-k2";
        let db = self.ratio(Side::Right, Entry::D, Entry::B, z, rule, e, k)?;
        let tb = self.ratio(Side::Right, Entry::T, Entry::B, z, rule, e, k)?;
        Ok(Some(vec![(db, vec![*k, *e]), (-tb * self.eps, vec![*k, k.with_kind(Kind::E)])]))
    }

    /// `k1(x) f(y) = (a_i/b_i) f(y) k1(x) − (t_i/b_i) f(x) k1(x)`, at `Δ_i(x, y)`.
    fn k1_f(&self, k: &Symbol, f: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        if k.inverted {
            return Ok(None);
        }
        let z = self.table.delta_left(k, f);
        if self.coincident(z) {
            return Ok(None);
        }
        let rule = "k1-f";
        let ab = self.ratio(Side::Left, Entry::A, Entry::B, z, rule, k, f)?;
        let tb = self.ratio(Side::Left, Entry::T, Entry::B, z, rule, k, f)?;
        Ok(Some(vec![(ab, vec![*f, *k]), (-tb, vec![k.with_kind(Kind::F), *k])]))
    }

    /// `k2(y) f(x) = (d_i/b_i) f(x) k2(y) − ε (s_i/b_i) f(y) k2(y)`, at `Δ_i(x, y)`.
    fn k2_f(&self, k: &Symbol, f: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        if k.inverted {
            return Ok(None);
        }
        let z = self.table.delta_left(f, k);
        if self.coincident(z) {
            return Ok(None);
        }
        let rule = "k2-f";
        let db = self.ratio(Side::Left, Entry::D, Entry::B, z, rule, f, k)?;
        let sb = self.ratio(Side::Left, Entry::S, Entry::B, z, rule, f, k)?;
        Ok(Some(vec![(db, vec![*f, *k]), (-sb * self.eps, vec![k.with_kind(Kind::F), *k])]))
    }

    /// `e(x) f(y) = ε f(y) e(x) − ε (t_i/b_i)(Δ_i) k1(x)⁻¹ k2(x) + ε (t_j/b_j)(Δ_j) k2(y) k1(y)⁻¹`.
    fn e_f(&self, e: &Symbol, f: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        let (zl, zr) = (self.table.delta_left(e, f), self.table.delta_right(e, f));
        if self.coincident(zl) || self.coincident(zr) {
            return Ok(None);
        }
        let rule = "e-f";
        let ti = self.ratio(Side::Left, Entry::T, Entry::B, zl, rule, e, f)?;
        let tj = self.ratio(Side::Right, Entry::T, Entry::B, zr, rule, e, f)?;
        let eps = self.eps;
        Ok(Some(vec![
            (C64::new(eps, 0.0), vec![*f, *e]),
            (-ti * eps, vec![e.with_kind(Kind::K1).inverse(), e.with_kind(Kind::K2)]),
            (tj * eps, vec![f.with_kind(Kind::K2), f.with_kind(Kind::K1).inverse()]),
        ]))
    }

    /// `e(Y) e(X)` for `X < Y`, from the two exchange relations of the `k1 e` composites.
    fn e_e(&self, ey: &Symbol, ex: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        let (zxy, zyx) = (self.table.delta_right(ex, ey), self.table.delta_right(ey, ex));
        if self.coincident(zxy) || self.coincident(zyx) {
            return Ok(None);
        }
        let rule = "e-e";
        let alpha_xy = self.ratio(Side::Right, Entry::A, Entry::B, zxy, rule, ex, ey)?;
        let alpha_yx = self.ratio(Side::Right, Entry::A, Entry::B, zyx, rule, ey, ex)?;
        let beta_xy = -self.ratio(Side::Right, Entry::S, Entry::B, zxy, rule, ex, ey)?;
        let beta_yx = -self.ratio(Side::Right, Entry::S, Entry::B, zyx, rule, ey, ex)?;
        let ad = self.ratio(Side::Right, Entry::A, Entry::D, zxy, rule, ex, ey)? / self.eps;
        if alpha_xy == C64::new(0.0, 0.0) {
            return Err(RuleError::ZeroDenominator { rule, x: ex.to_string(), y: ey.to_string() });
        }
        Ok(Some(vec![
            (ad * alpha_yx / alpha_xy, vec![*ex, *ey]),
            (ad * beta_yx / alpha_xy, vec![*ey, *ey]),
            (-beta_xy / alpha_xy, vec![*ex, *ex]),
        ]))
    }

    /// `f(Y) f(X)` for `X < Y`, from the two exchange relations of the `f k1` composites.
    fn f_f(&self, fy: &Symbol, fx: &Symbol) -> Result<Option<Rewrite>, RuleError> {
        let (zxy, zyx) = (self.table.delta_left(fx, fy), self.table.delta_left(fy, fx));
        if self.coincident(zxy) || self.coincident(zyx) {
            return Ok(None);
        }
        let rule = "f-f";
        let mu_xy = self.ratio(Side::Left, Entry::A, Entry::B, zxy, rule, fx, fy)?;
        let mu_yx = self.ratio(Side::Left, Entry::A, Entry::B, zyx, rule, fy, fx)?;
        let nu_xy = -self.ratio(Side::Left, Entry::T, Entry::B, zxy, rule, fx, fy)?;
        let nu_yx = -self.ratio(Side::Left, Entry::T, Entry::B, zyx, rule, fy, fx)?;
        let da = self.ratio(Side::Left, Entry::D, Entry::A, zxy, rule, fx, fy)? / self.eps;
        if mu_yx == C64::new(0.0, 0.0) {
            return Err(RuleError::ZeroDenominator { rule, x: fx.to_string(), y: fy.to_string() });
        }
        Ok(Some(vec![
            (da * mu_xy / mu_yx, vec![*fx, *fy]),
            (da * nu_xy / mu_yx, vec![*fx, *fx]),
            (-nu_yx / mu_yx, vec![*fy, *fy]),
        ]))
    }
}

/// Builds the rule set and evaluates every rule on every ordered pair of probe symbols
/// (all kinds and signs at each base tag, shifted by −1, 0, +1 quanta), so that any pole
/// among the coefficients is reported up front.
pub fn instantiate_catalog(
    ri: &StructuredR,
    rj: &StructuredR,
    grading: Grading,
    table: TagTable,
) -> Result<RuleSet, RuleError> {
    let rules = RuleSet::new(ri.clone(), rj.clone(), grading, table);
    let probes = probe_symbols(rules.table());
    for p in &probes {
        for q in &probes {
            rules.rewrite(p, q)?;
        }
    }
    Ok(rules)
}

fn probe_symbols(table: &TagTable) -> Vec<Symbol> {
    use super::symbols::{Pm, Tag};
    let mut out = Vec::new();
    for base in 0..table.values.len() {
        for shift in -1..=1 {
            for sign in [Pm::Plus, Pm::Minus] {
                for kind in [Kind::F, Kind::K1, Kind::K2, Kind::E] {
                    out.push(Symbol::new(kind, sign, Tag::new(base, shift)));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rll_verify::symbols::{Pm, Tag};
    use crate::rmatrix::builtin_trig;
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn rules(hi: f64, hj: f64) -> RuleSet {
        let ri = builtin_trig(c(1.0 / PI), c(hi)).unwrap();
        let rj = builtin_trig(c(1.0 / PI), c(hj)).unwrap();
        RuleSet::new(ri, rj, Grading::Even, TagTable::new(vec![c(0.7), c(0.0)], c(0.0)))
    }

    #[test]
    fn k1_currents_commute_for_trig() {
        let r = rules(0.3, 0.4);
        let u = Symbol::k1(Pm::Plus, Tag::new(0, 0));
        let v = Symbol::k1(Pm::Plus, Tag::new(1, 0));
        let rw = r.rewrite(&v, &u).unwrap().unwrap();
        assert_eq!(rw, vec![(c(1.0), vec![u, v])]);
        assert_eq!(r.rewrite(&u, &v).unwrap(), None);
    }

    #[test]
    fn k1_k2_ratio() {
        let ri = builtin_trig(c(1.0 / PI), c(0.3)).unwrap();
        let rj = builtin_trig(c(1.0 / PI), c(0.4)).unwrap();
        let r = RuleSet::new(ri, rj, Grading::Even, TagTable::new(vec![c(0.0), c(0.7)], c(0.0)));
        // u = 0.7 has the larger tag, so k1(u) k2(v) is out of order
        let k1 = Symbol::k1(Pm::Plus, Tag::new(1, 0));
        let k2 = Symbol::k2(Pm::Plus, Tag::new(0, 0));
        assert!(k1 > k2);
        // k1(u) k2(v) = (b_j/b_i)(u − v) k2(v) k1(u) with u − v = 0.7
        let rw = r.rewrite(&k1, &k2).unwrap().unwrap();
        let bi = 0.7f64.sinh() / 1.0f64.sinh();
        let bj = 0.7f64.sinh() / 1.1f64.sinh();
        assert!((rw[0].0 - c(bj / bi)).norm() < 1e-14);
        assert!((rw[0].0 - c(1.0f64.sinh() / 1.1f64.sinh())).norm() < 1e-14);
        assert_eq!(rw[0].1, vec![k2, k1]);
    }

    #[test]
    fn inverse_pair_cancels() {
        let r = rules(0.3, 0.3);
        let k = Symbol::k2(Pm::Minus, Tag::new(1, 0));
        assert_eq!(r.rewrite(&k, &k.inverse()).unwrap(), Some(vec![(c(1.0), vec![])]));
        assert_eq!(r.rewrite(&k.inverse(), &k).unwrap(), Some(vec![(c(1.0), vec![])]));
    }

    #[test]
    fn coincident_tags_are_stuck() {
        let r = rules(0.3, 0.3);
        let t = Tag::new(0, 0);
        assert_eq!(r.rewrite(&Symbol::e(Pm::Plus, t), &Symbol::k1(Pm::Plus, t)).unwrap(), None);
        assert_eq!(r.rewrite(&Symbol::k2(Pm::Plus, t), &Symbol::k1(Pm::Plus, t)).unwrap(), None);
    }

    #[test]
    fn unknown_tag() {
        let r = rules(0.3, 0.3);
        let a = Symbol::k1(Pm::Plus, Tag::new(5, 0));
        assert!(matches!(r.rewrite(&a, &a), Err(RuleError::UnknownTag(_))));
    }
}
