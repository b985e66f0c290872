//! Gauss decomposition of 2×2 block matrices.
//!
//! ```text
//! L = [1 0; f 1] [k1 0; 0 k2] [1 e; 0 1]
//!   = [k1, k1 e; f k1, k2 + f k1 e]
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{condition_number, CMat};

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    K1,
    K2,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GaussError {
    #[error("block {block:?} is singular (condition estimate {cond:.3e})")]
    Singular { block: Block, cond: f64 },
    #[error("blocks have mismatched dimensions")]
    Dimension,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix2 {
    pub l11: CMat,
    pub l12: CMat,
    pub l21: CMat,
    pub l22: CMat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussFactors {
    pub k1: CMat,
    pub k2: CMat,
    pub e: CMat,
    pub f: CMat,
}

fn square_dim(ms: &[&CMat]) -> Result<usize, GaussError> {
    let d = ms[0].nrows();
    if ms.iter().all(|m| m.nrows() == d && m.ncols() == d) {
        Ok(d)
    } else {
        Err(GaussError::Dimension)
    }
}

fn checked_inverse(m: &CMat, block: Block) -> Result<CMat, GaussError> {
    let cond = condition_number(m);
    if !(cond <= MAX_CONDITION) {
        return Err(GaussError::Singular { block, cond });
    }
    m.clone().try_inverse().ok_or(GaussError::Singular { block, cond })
}

impl BlockMatrix2 {
    pub fn new(l11: CMat, l12: CMat, l21: CMat, l22: CMat) -> Result<Self, GaussError> {
        square_dim(&[&l11, &l12, &l21, &l22])?;
        Ok(BlockMatrix2 { l11, l12, l21, l22 })
    }

    pub fn identity(d: usize) -> Self {
        BlockMatrix2 {
            l11: CMat::identity(d, d),
            l12: CMat::zeros(d, d),
            l21: CMat::zeros(d, d),
            l22: CMat::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.l11.nrows()
    }

    /// Splits a `2d × 2d` matrix into its four `d × d` blocks.
    pub fn from_full(m: &CMat) -> Result<Self, GaussError> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
            return Err(GaussError::Dimension);
        }
        let d = m.nrows() / 2;
        Ok(BlockMatrix2 {
            l11: m.view((0, 0), (d, d)).into_owned(),
            l12: m.view((0, d), (d, d)).into_owned(),
            l21: m.view((d, 0), (d, d)).into_owned(),
            l22: m.view((d, d), (d, d)).into_owned(),
        })
    }

    pub fn to_full(&self) -> CMat {
        let d = self.dim();
        let mut m = CMat::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(&self.l11);
        m.view_mut((0, d), (d, d)).copy_from(&self.l12);
        m.view_mut((d, 0), (d, d)).copy_from(&self.l21);
        m.view_mut((d, d), (d, d)).copy_from(&self.l22);
        m
    }
}

impl GaussFactors {
    pub fn new(k1: CMat, k2: CMat, e: CMat, f: CMat) -> Result<Self, GaussError> {
        square_dim(&[&k1, &k2, &e, &f])?;
        Ok(GaussFactors { k1, k2, e, f })
    }
}

pub fn decompose(l: &BlockMatrix2) -> Result<GaussFactors, GaussError> {
    let k1 = l.l11.clone();
    let k1_inv = checked_inverse(&k1, Block::K1)?;
    let e = &k1_inv * &l.l12;
    let f = &l.l21 * &k1_inv;
    let k2 = &l.l22 - &f * &k1 * &e;
    let cond = condition_number(&k2);
    if !(cond <= MAX_CONDITION) {
        return Err(GaussError::Singular { block: Block::K2, cond });
    }
    Ok(GaussFactors { k1, k2, e, f })
}

pub fn compose(g: &GaussFactors) -> BlockMatrix2 {
    let k1e = &g.k1 * &g.e;
    BlockMatrix2 {
        l11: g.k1.clone(),
        l12: k1e.clone(),
        l21: &g.f * &g.k1,
        l22: &g.k2 + &g.f * &k1e,
    }
}

/// `[k1⁻¹ + e k2⁻¹ f, −e k2⁻¹; −k2⁻¹ f, k2⁻¹]`.
pub fn invert(g: &GaussFactors) -> Result<BlockMatrix2, GaussError> {
    let k1_inv = checked_inverse(&g.k1, Block::K1)?;
    let k2_inv = checked_inverse(&g.k2, Block::K2)?;
    let ek2 = &g.e * &k2_inv;
    Ok(BlockMatrix2 {
        l11: &k1_inv + &ek2 * &g.f,
        l12: -ek2,
        l21: -(&k2_inv * &g.f),
        l22: k2_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn s(x: f64) -> CMat {
        CMat::from_element(1, 1, C64::new(x, 0.0))
    }

    #[test]
    fn scalar_example() {
        let l = BlockMatrix2::new(s(1.0), s(2.0), s(3.0), s(4.0)).unwrap();
        let g = decompose(&l).unwrap();
        assert_eq!((g.k1.clone(), g.e.clone(), g.f.clone(), g.k2.clone()), (s(1.0), s(2.0), s(3.0), s(-2.0)));
        assert_eq!(compose(&g), l);
        let inv = invert(&g).unwrap();
        assert_eq!(inv, BlockMatrix2::new(s(-2.0), s(1.0), s(1.5), s(-0.5)).unwrap());
    }

    #[test]
    fn identity_blocks() {
        let g = decompose(&BlockMatrix2::identity(3)).unwrap();
        assert_eq!(g.k1, CMat::identity(3, 3));
        assert_eq!(g.k2, CMat::identity(3, 3));
        assert_eq!(g.e, CMat::zeros(3, 3));
        assert_eq!(invert(&g).unwrap(), BlockMatrix2::identity(3));
    }

    #[test]
    fn singular_k1_is_named() {
        let l = BlockMatrix2::new(s(0.0), s(1.0), s(1.0), s(1.0)).unwrap();
        assert!(matches!(decompose(&l), Err(GaussError::Singular { block: Block::K1, .. })));
        let l = BlockMatrix2::new(s(1.0), s(2.0), s(2.0), s(4.0)).unwrap();
        assert!(matches!(decompose(&l), Err(GaussError::Singular { block: Block::K2, .. })));
    }

    #[test]
    fn full_roundtrip() {
        let m = CMat::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(BlockMatrix2::from_full(&m).unwrap().to_full(), m);
    }
}
