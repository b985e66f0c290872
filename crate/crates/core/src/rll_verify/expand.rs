//! Componentwise expansion of `R_i L_1(u) ϖ L_2(v) ϖ − ϖ L_2(v) ϖ L_1(u) R_j` with
//! Gauss-form entries `L = [k1, k1 e; f k1, k2 + f k1 e]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ncpoly::NCPoly;
use super::symbols::{Kind, Pm, Symbol, Tag, TagTable};
use crate::linalg::CMat;
use crate::rmatrix::{Grading, PoleError, StructuredR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignPair {
    #[serde(rename = "++")]
    PlusPlus,
    #[serde(rename = "--")]
    MinusMinus,
    #[serde(rename = "+-")]
    PlusMinus,
}

impl SignPair {
    pub const ALL: [SignPair; 3] = [SignPair::PlusPlus, SignPair::MinusMinus, SignPair::PlusMinus];

    pub fn signs(self) -> (Pm, Pm) {
        match self {
            SignPair::PlusPlus => (Pm::Plus, Pm::Plus),
            SignPair::MinusMinus => (Pm::Minus, Pm::Minus),
            SignPair::PlusMinus => (Pm::Plus, Pm::Minus),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SignPair::PlusPlus => "(+,+)",
            SignPair::MinusMinus => "(-,-)",
            SignPair::PlusMinus => "(+,-)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ExpandError {
    #[error("u and v carry the same tag {0:?}")]
    CoincidentTags(Tag),
    #[error("tag {0:?} is not in the tag table")]
    UnknownTag(Tag),
    #[error("{which} R-matrix: {source}")]
    Pole { which: &'static str, source: PoleError },
}

/// One matrix component: row `(a, b)`, column `(c, d)`, 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub row: (usize, usize),
    pub col: (usize, usize),
    pub lhs: NCPoly,
    pub rhs: NCPoly,
}

impl Component {
    pub fn label(&self) -> String {
        format!("(({}{}),({}{}))", self.row.0, self.row.1, self.col.0, self.col.1)
    }

    pub fn difference(&self) -> NCPoly {
        &self.lhs - &self.rhs
    }
}

/// Gauss-form entry `L_{ab}` (0-based) of `L^sign(tag)`.
pub fn l_entry(a: usize, b: usize, sign: Pm, tag: Tag) -> NCPoly {
    let k1 = NCPoly::sym(Symbol::new(Kind::K1, sign, tag));
    let k2 = NCPoly::sym(Symbol::new(Kind::K2, sign, tag));
    let e = NCPoly::sym(Symbol::new(Kind::E, sign, tag));
    let f = NCPoly::sym(Symbol::new(Kind::F, sign, tag));
    match (a, b) {
        (0, 0) => k1,
        (0, 1) => &k1 * &e,
        (1, 0) => &f * &k1,
        (1, 1) => &k2 + &(&(&f * &k1) * &e),
        _ => panic!("L index out of range"),
    }
}

fn varpi(x: usize, y: usize, eps: f64) -> f64 {
    if x == 1 && y == 1 {
        eps
    } else {
        1.0
    }
}

/// The 16 components in row-major order of `((a b), (c d))`.
pub fn expand_components(
    ri: &StructuredR,
    rj: &StructuredR,
    grading: Grading,
    pair: SignPair,
    u: Tag,
    v: Tag,
    table: &TagTable,
) -> Result<Vec<Component>, ExpandError> {
    if u == v {
        return Err(ExpandError::CoincidentTags(u));
    }
    for t in [u, v] {
        if !table.contains(t) {
            return Err(ExpandError::UnknownTag(t));
        }
    }
    let (su, sv) = pair.signs();
    let xu = Symbol::new(Kind::K1, su, u);
    let yv = Symbol::new(Kind::K1, sv, v);
    let mi: CMat = ri
        .eval(table.delta_left(&xu, &yv))
        .map_err(|source| ExpandError::Pole { which: "left", source })?;
    let mj: CMat = rj
        .eval(table.delta_right(&xu, &yv))
        .map_err(|source| ExpandError::Pole { which: "right", source })?;
    let eps = grading.sign();
    let lu = |a: usize, b: usize| l_entry(a, b, su, u);
    let lv = |a: usize, b: usize| l_entry(a, b, sv, v);
    let idx = |x: usize, y: usize| 2 * x + y;

    let mut out = Vec::with_capacity(16);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let mut lhs = NCPoly::zero();
                    let mut rhs = NCPoly::zero();
                    for p in 0..2 {
                        for q in 0..2 {
                            let ri_coef = mi[(idx(a, b), idx(p, q))];
                            if ri_coef != 0.0.into() {
                                let w = varpi(c, q, eps) * varpi(c, d, eps);
                                lhs = &lhs + &(&lu(p, c) * &lv(q, d)).scale(ri_coef * w);
                            }
                            let rj_coef = mj[(idx(p, q), idx(c, d))];
                            if rj_coef != 0.0.into() {
                                let w = varpi(a, b, eps) * varpi(a, q, eps);
                                rhs = &rhs + &(&lv(b, q) * &lu(a, p)).scale(rj_coef * w);
                            }
                        }
                    }
                    out.push(Component { row: (a + 1, b + 1), col: (c + 1, d + 1), lhs, rhs });
                }
            }
        }
    }
    Ok(out)
}
