//! Parameter-transforming rules `ρ_n^±` and the orbits `R^(n)` they generate.
//!
//! Rules are attached to edges: edge `n` links index `n` to `n + 1`. `ρ_n^+` walks
//! edge `n` forward and `ρ_n^-` walks edge `n - 1` backward, so `ρ_{n+1}^- ∘ ρ_n^+ = id`.

use std::collections::BTreeMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::CheckReport;
use crate::rmatrix::{check_unitarity, check_ybe, Lineage, Params, StructuredR};
use crate::sampling::SamplingSpec;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FamilyError {
    #[error("rule needs {name} at index {index}, which is not provided")]
    MissingParameter { name: String, index: i64 },
    #[error("index {index} outside orbit range [{lo}, {hi}]")]
    OutOfRange { index: i64, lo: i64, hi: i64 },
    #[error("orbit range [{lo}, {hi}] must contain 0")]
    RangeMissingZero { lo: i64, hi: i64 },
}

/// Per-index complex values with an optional fallback.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<C64>,
    #[serde(default)]
    pub values: BTreeMap<i64, C64>,
}

impl Sequence {
    pub fn constant(z: C64) -> Self {
        Sequence { default: Some(z), values: BTreeMap::new() }
    }

    pub fn from_values(values: impl IntoIterator<Item = (i64, C64)>) -> Self {
        Sequence { default: None, values: values.into_iter().collect() }
    }

    pub fn get(&self, n: i64) -> Option<C64> {
        self.values.get(&n).copied().or(self.default)
    }

    fn require(&self, name: &str, n: i64) -> Result<C64, FamilyError> {
        self.get(n).ok_or_else(|| FamilyError::MissingParameter { name: name.into(), index: n })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhoKind {
    Identity,
    /// `1/η^(n+1) = 1/η^(n) + ħ c_n`.
    PeriodRecursion { charges: Sequence },
    /// `η^(n)` read from an explicit table.
    PeriodReplace { etas: Sequence },
    /// `ħ^(n+1) = ħ^(n) + ξ_n`.
    PhaseShift { shifts: Sequence },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn inverse(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl RhoKind {
    /// Moves `p` across `edge` in the given direction.
    pub fn step(&self, edge: i64, dir: Direction, p: &Params) -> Result<Params, FamilyError> {
        let mut out = p.clone();
        match self {
            RhoKind::Identity => {}
            RhoKind::PeriodRecursion { charges } => {
                let shift = p.hbar * charges.require("c", edge)?;
                let inv = C64::new(1.0, 0.0) / p.eta;
                out.eta = C64::new(1.0, 0.0)
                    / match dir {
                        Direction::Forward => inv + shift,
                        Direction::Backward => inv - shift,
                    };
            }
            RhoKind::PeriodReplace { etas } => {
                let target = match dir {
                    Direction::Forward => edge + 1,
                    Direction::Backward => edge,
                };
                out.eta = etas.require("eta", target)?;
            }
            RhoKind::PhaseShift { shifts } => {
                let xi = shifts.require("xi", edge)?;
                out.hbar = match dir {
                    Direction::Forward => p.hbar + xi,
                    Direction::Backward => p.hbar - xi,
                };
            }
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, RhoKind::Identity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoSpec {
    pub default: RhoKind,
    #[serde(default)]
    pub overrides: BTreeMap<i64, RhoKind>,
}

impl RhoSpec {
    pub fn uniform(kind: RhoKind) -> Self {
        RhoSpec { default: kind, overrides: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        RhoSpec::uniform(RhoKind::Identity)
    }

    pub fn phase_shift(xi: C64) -> Self {
        RhoSpec::uniform(RhoKind::PhaseShift { shifts: Sequence::constant(xi) })
    }

    pub fn period_recursion(c: C64) -> Self {
        RhoSpec::uniform(RhoKind::PeriodRecursion { charges: Sequence::constant(c) })
    }

    pub fn period_replace(etas: Sequence) -> Self {
        RhoSpec::uniform(RhoKind::PeriodReplace { etas })
    }

    /// Identity on every edge except `edge`, where `kind` applies.
    pub fn mostly_identity(edge: i64, kind: RhoKind) -> Self {
        RhoSpec { default: RhoKind::Identity, overrides: BTreeMap::from([(edge, kind)]) }
    }

    pub fn kind_at(&self, edge: i64) -> &RhoKind {
        self.overrides.get(&edge).unwrap_or(&self.default)
    }

    pub fn fingerprint(&self) -> String {
        serde_json::to_string(self).expect("rho serialization")
    }

    /// Parameters at `target`, recomputed by walking edges from the anchor.
    pub fn params_at(&self, anchor: &Params, anchor_index: i64, target: i64) -> Result<Params, FamilyError> {
        let mut p = anchor.clone();
        if target > anchor_index {
            for e in anchor_index..target {
                p = self.kind_at(e).step(e, Direction::Forward, &p)?;
            }
        } else {
            for e in (target..anchor_index).rev() {
                p = self.kind_at(e).step(e, Direction::Backward, &p)?;
            }
        }
        Ok(p)
    }
}

/// `ρ_n^±` applied to `r`, which is taken to sit at index `n`.
///
/// If `r` was itself produced by this rule, the image is recomputed from its anchor,
/// which keeps `ρ^- ∘ ρ^+` exact.
pub fn apply_rho(rho: &RhoSpec, sign: Sign, n: i64, r: &StructuredR) -> Result<StructuredR, FamilyError> {
    let fp = rho.fingerprint();
    let (anchor, anchor_index) = match r.lineage() {
        Some(l) if l.rule == fp && l.index == n => (l.anchor.clone(), l.anchor_index),
        _ => (r.params().clone(), n),
    };
    let target = match sign {
        Sign::Plus => n + 1,
        Sign::Minus => n - 1,
    };
    let params = rho.params_at(&anchor, anchor_index, target)?;
    Ok(r.with_params(params).with_lineage(Some(Lineage { rule: fp, anchor, anchor_index, index: target })))
}

/// Runs unitarity and Yang-Baxter checks on both images `ρ_0^±(R)`.
pub fn check_rho_admissible(rho: &RhoSpec, r: &StructuredR, spec: &SamplingSpec, tol: f64) -> CheckReport {
    let mut parts = Vec::new();
    let mut errors = Vec::new();
    for (sign, label) in [(Sign::Plus, "+"), (Sign::Minus, "-")] {
        match apply_rho(rho, sign, 0, r) {
            Ok(img) => {
                let img = img.with_name(format!("{}^{}", r.name(), label));
                parts.push(check_unitarity(&img, spec, tol));
                parts.push(check_ybe(&img, spec, tol));
            }
            Err(e) => errors.push(format!("rho{label}: {e}")),
        }
    }
    merge_with_errors("rho_admissible", parts, errors, spec, tol)
}

fn merge_with_errors(
    name: &str,
    parts: Vec<CheckReport>,
    errors: Vec<String>,
    spec: &SamplingSpec,
    tol: f64,
) -> CheckReport {
    if errors.is_empty() {
        return CheckReport::merge(name, &parts);
    }
    let mut b = CheckReport::builder("errors", tol, spec.seed);
    for e in errors {
        b.record_error(&[], e);
    }
    let mut all = parts;
    all.push(b.finish());
    CheckReport::merge(name, &all)
}

/// A lazily generated sequence `R^(n)` for `n` in an integer range.
#[derive(Debug)]
pub struct FamilyOrbit {
    base: StructuredR,
    rho: RhoSpec,
    range: (i64, i64),
    charges: Sequence,
    memo: RwLock<BTreeMap<i64, StructuredR>>,
}

impl Clone for FamilyOrbit {
    fn clone(&self) -> Self {
        FamilyOrbit {
            base: self.base.clone(),
            rho: self.rho.clone(),
            range: self.range,
            charges: self.charges.clone(),
            memo: RwLock::new(self.memo.read().expect("memo lock").clone()),
        }
    }
}

pub fn orbit(base: StructuredR, rho: RhoSpec, range: (i64, i64)) -> Result<FamilyOrbit, FamilyError> {
    FamilyOrbit::new(base, rho, range)
}

impl FamilyOrbit {
    pub fn new(base: StructuredR, rho: RhoSpec, range: (i64, i64)) -> Result<Self, FamilyError> {
        let (lo, hi) = range;
        if lo > 0 || hi < 0 {
            return Err(FamilyError::RangeMissingZero { lo, hi });
        }
        Ok(FamilyOrbit {
            base: base.with_lineage(None),
            rho,
            range,
            charges: Sequence::constant(C64::new(0.0, 0.0)),
            memo: RwLock::new(BTreeMap::new()),
        })
    }

    /// Central charges `c_n`; default 0 everywhere.
    pub fn with_charges(mut self, charges: Sequence) -> Self {
        self.charges = charges;
        self
    }

    pub fn base(&self) -> &StructuredR {
        &self.base
    }

    pub fn rho(&self) -> &RhoSpec {
        &self.rho
    }

    pub fn range(&self) -> (i64, i64) {
        self.range
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.range.0..=self.range.1
    }

    fn check_range(&self, n: i64) -> Result<(), FamilyError> {
        let (lo, hi) = self.range;
        if n < lo || n > hi {
            Err(FamilyError::OutOfRange { index: n, lo, hi })
        } else {
            Ok(())
        }
    }

    pub fn member(&self, n: i64) -> Result<StructuredR, FamilyError> {
        self.check_range(n)?;
        if let Some(r) = self.memo.read().expect("memo lock").get(&n) {
            return Ok(r.clone());
        }
        let anchor = self.base.params().clone();
        let params = self.rho.params_at(&anchor, 0, n)?;
        let r = self.base.with_params(params).with_lineage(Some(Lineage {
            rule: self.rho.fingerprint(),
            anchor,
            anchor_index: 0,
            index: n,
        }));
        self.memo.write().expect("memo lock").entry(n).or_insert_with(|| r.clone());
        Ok(r)
    }

    pub fn charge(&self, n: i64) -> C64 {
        self.charges.get(n).unwrap_or(C64::new(0.0, 0.0))
    }

    /// `c^(i,j) = c_i + ... + c_{j-1}`; negated when `j < i`.
    pub fn central_sum(&self, i: i64, j: i64) -> C64 {
        let (lo, hi, sign) = if i <= j { (i, j, 1.0) } else { (j, i, -1.0) };
        (lo..hi).map(|k| self.charge(k)).sum::<C64>() * sign
    }

    /// Runs unitarity and Yang-Baxter checks on every member in range.
    pub fn check_members(&self, spec: &SamplingSpec, tol: f64) -> CheckReport {
        let mut parts = Vec::new();
        let mut errors = Vec::new();
        for n in self.indices() {
            match self.member(n) {
                Ok(r) => {
                    let r = r.with_name(format!("{}^({n})", self.base.name()));
                    parts.push(check_unitarity(&r, spec, tol));
                    parts.push(check_ybe(&r, spec, tol));
                }
                Err(e) => errors.push(format!("member {n}: {e}")),
            }
        }
        merge_with_errors("orbit_members", parts, errors, spec, tol)
    }
}

/// One edge crossing of a composed parameter map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub edge: i64,
    pub dir: Direction,
    pub kind: RhoKind,
}

/// A composition of single-edge steps, kept in reduced form: identity edges are
/// dropped and adjacent inverse pairs cancel, so equal maps compare equal exactly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamMap {
    steps: Vec<Step>,
}

impl ParamMap {
    pub fn identity() -> Self {
        ParamMap::default()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    fn push(&mut self, step: Step) {
        if step.kind.is_identity() {
            return;
        }
        if let Some(last) = self.steps.last() {
            if last.edge == step.edge && last.dir == step.dir.inverse() {
                self.steps.pop();
                return;
            }
        }
        self.steps.push(step);
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &ParamMap) -> ParamMap {
        let mut out = first.clone();
        for s in &self.steps {
            out.push(s.clone());
        }
        out
    }

    pub fn apply(&self, p: &Params) -> Result<Params, FamilyError> {
        let mut p = p.clone();
        for s in &self.steps {
            p = s.kind.step(s.edge, s.dir, &p)?;
        }
        Ok(p)
    }
}

/// The map taking member `n` parameters to member `m` parameters.
pub fn tau(orbit: &FamilyOrbit, m: i64, n: i64) -> Result<ParamMap, FamilyError> {
    orbit.check_range(m)?;
    orbit.check_range(n)?;
    let mut map = ParamMap::identity();
    if m > n {
        for e in n..m {
            map.push(Step { edge: e, dir: Direction::Forward, kind: orbit.rho.kind_at(e).clone() });
        }
    } else {
        for e in (m..n).rev() {
            map.push(Step { edge: e, dir: Direction::Backward, kind: orbit.rho.kind_at(e).clone() });
        }
    }
    Ok(map)
}
