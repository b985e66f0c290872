//! Normal ordering by repeated application of the pair rules.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::ncpoly::{word_string, NCPoly, Word, PRUNE_RELATIVE};
use super::rules::{RuleError, RuleSet};
use crate::C64;

pub const STEP_BUDGET: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ReduceError {
    #[error("no normal form within {budget} steps; last word {word}")]
    Budget { budget: usize, word: String },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Smallest pending word first, leftmost redex first.
    Leftmost,
    /// Random pending word and random redex, from a seeded generator.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub poly: NCPoly,
    /// Largest coefficient magnitude seen at any point during the reduction.
    pub max_intermediate: f64,
    pub steps: usize,
}

impl Reduction {
    /// Largest surviving coefficient relative to the largest intermediate one.
    pub fn relative_residual(&self) -> f64 {
        if self.max_intermediate == 0.0 {
            0.0
        } else {
            self.poly.max_coeff() / self.max_intermediate
        }
    }
}

pub fn normal_order(p: &NCPoly, rules: &RuleSet) -> Result<NCPoly, ReduceError> {
    reduce(p, rules, Strategy::Leftmost).map(|r| r.poly)
}

fn redexes(w: &Word, rules: &RuleSet, all: bool) -> Result<Vec<(usize, Vec<(C64, Word)>)>, RuleError> {
    let mut out = Vec::new();
    for i in 0..w.len().saturating_sub(1) {
        if let Some(rw) = rules.rewrite(&w[i], &w[i + 1])? {
            out.push((i, rw));
            if !all {
                break;
            }
        }
    }
    Ok(out)
}

pub fn reduce(p: &NCPoly, rules: &RuleSet, strategy: Strategy) -> Result<Reduction, ReduceError> {
    let mut rng = match strategy {
        Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Strategy::Leftmost => None,
    };
    let mut pending: BTreeMap<Word, C64> = p.clone().into_terms();
    let mut done = NCPoly::zero();
    let mut max = p.max_coeff();
    let mut steps = 0usize;

    while !pending.is_empty() {
        let word = match rng.as_mut() {
            None => pending.keys().next().cloned().expect("nonempty"),
            Some(r) => {
                let k = r.random_range(0..pending.len());
                pending.keys().nth(k).cloned().expect("in range")
            }
        };
        let coef = pending.remove(&word).expect("present");
        if coef.norm() <= PRUNE_RELATIVE * max {
            continue;
        }
        let found = redexes(&word, rules, rng.is_some())?;
        if found.is_empty() {
            done.add_term(word, coef);
            continue;
        }
        steps += 1;
        if steps > STEP_BUDGET {
            return Err(ReduceError::Budget { budget: STEP_BUDGET, word: word_string(&word) });
        }
        let (pos, rewrite) = match rng.as_mut() {
            None => found.into_iter().next().expect("nonempty"),
            Some(r) => {
                let k = r.random_range(0..found.len());
                found.into_iter().nth(k).expect("in range")
            }
        };
        for (c, mid) in rewrite {
            let mut w = Vec::with_capacity(word.len() + mid.len());
            w.extend_from_slice(&word[..pos]);
            w.extend_from_slice(&mid);
            w.extend_from_slice(&word[pos + 2..]);
            let slot = pending.entry(w).or_insert(C64::new(0.0, 0.0));
            *slot += coef * c;
            max = max.max(slot.norm());
        }
    }
    max = max.max(done.max_coeff());
    Ok(Reduction { poly: done.pruned(PRUNE_RELATIVE, max), max_intermediate: max, steps })
}
