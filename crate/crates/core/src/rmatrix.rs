//! Structured 4×4 R-matrices with six entry functions.
//!
//! Rows and columns are indexed by pairs `(i, j)` in the order `(11), (12), (21), (22)`,
//! so the pair `(i, j)` sits at position `2(i-1) + (j-1)`. The nonzero pattern is
//!
//! ```text
//! a 0 0 0
//! 0 b t 0
//! 0 s c 0
//! 0 0 0 d
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{flip2, identity, kron, max_abs, swap23, CMat};
use crate::report::CheckReport;
use crate::sampling::SamplingSpec;
use crate::C64;

pub const DEFAULT_POLE_GUARD: f64 = 1e-6;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entry {
    A,
    B,
    C,
    D,
    S,
    T,
}

impl Entry {
    pub const ALL: [Entry; 6] = [Entry::A, Entry::B, Entry::C, Entry::D, Entry::S, Entry::T];

    pub fn name(self) -> &'static str {
        match self {
            Entry::A => "a",
            Entry::B => "b",
            Entry::C => "c",
            Entry::D => "d",
            Entry::S => "s",
            Entry::T => "t",
        }
    }

    /// Matrix position of this entry.
    pub fn position(self) -> (usize, usize) {
        match self {
            Entry::A => (0, 0),
            Entry::B => (1, 1),
            Entry::T => (1, 2),
            Entry::S => (2, 1),
            Entry::C => (2, 2),
            Entry::D => (3, 3),
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub eta: C64,
    pub hbar: C64,
    #[serde(default)]
    pub extra: BTreeMap<String, C64>,
}

impl Params {
    pub fn new(eta: C64, hbar: C64) -> Self {
        Params { eta, hbar, extra: BTreeMap::new() }
    }

    pub fn get(&self, name: &str) -> Option<C64> {
        match name {
            "eta" => Some(self.eta),
            "hbar" => Some(self.hbar),
            _ => self.extra.get(name).copied(),
        }
    }

    pub fn named(&self) -> Vec<(String, C64)> {
        let mut out = vec![("eta".to_string(), self.eta), ("hbar".to_string(), self.hbar)];
        out.extend(self.extra.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }
}

/// Grading sign `ε`; `ϖ = diag(1, 1, 1, ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Grading {
    Even,
    Odd,
}

impl Grading {
    pub fn from_sign(sign: i32) -> Option<Grading> {
        match sign {
            1 => Some(Grading::Even),
            -1 => Some(Grading::Odd),
            _ => None,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Grading::Even => 1.0,
            Grading::Odd => -1.0,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Grading::Even => 1,
            Grading::Odd => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("entry {entry} has a pole within {distance:.3e} of u = {u}")]
pub struct PoleError {
    pub entry: Entry,
    pub u: C64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RError {
    #[error("parameter {0} must be nonzero")]
    ZeroParameter(&'static str),
    #[error(transparent)]
    Pole(#[from] PoleError),
}

type ValueFn = dyn Fn(C64, &Params) -> C64 + Send + Sync;
type DistanceFn = dyn Fn(C64, &Params) -> f64 + Send + Sync;

/// One entry function together with an optional estimate of the distance from `u`
/// to its nearest pole.
#[derive(Clone)]
pub struct EntryFn {
    value: Arc<ValueFn>,
    pole_distance: Option<Arc<DistanceFn>>,
}

impl EntryFn {
    pub fn new(value: impl Fn(C64, &Params) -> C64 + Send + Sync + 'static) -> Self {
        EntryFn { value: Arc::new(value), pole_distance: None }
    }

    pub fn with_pole(
        mut self,
        distance: impl Fn(C64, &Params) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.pole_distance = Some(Arc::new(distance));
        self
    }

    pub fn constant(z: impl Into<C64>) -> Self {
        let z = z.into();
        EntryFn::new(move |_, _| z)
    }

    pub fn zero() -> Self {
        EntryFn::constant(C64::new(0.0, 0.0))
    }

    pub fn value(&self, u: C64, p: &Params) -> C64 {
        (self.value)(u, p)
    }

    pub fn pole_distance(&self, u: C64, p: &Params) -> Option<f64> {
        self.pole_distance.as_ref().map(|d| d(u, p))
    }

    /// The entry with its argument negated.
    pub fn reflected(&self) -> EntryFn {
        let v = self.value.clone();
        let d = self.pole_distance.clone();
        EntryFn {
            value: Arc::new(move |u, p| v(-u, p)),
            pole_distance: d.map(|d| Arc::new(move |u: C64, p: &Params| d(-u, p)) as Arc<DistanceFn>),
        }
    }

    /// Pointwise product with another entry function; poles of both factors are guarded.
    pub fn times(&self, other: &EntryFn) -> EntryFn {
        let (v1, v2) = (self.value.clone(), other.value.clone());
        let (d1, d2) = (self.pole_distance.clone(), other.pole_distance.clone());
        let dist: Option<Arc<DistanceFn>> = match (d1, d2) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d),
            (Some(d1), Some(d2)) => Some(Arc::new(move |u, p| d1(u, p).min(d2(u, p)))),
        };
        EntryFn { value: Arc::new(move |u, p| v1(u, p) * v2(u, p)), pole_distance: dist }
    }
}

impl fmt::Debug for EntryFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntryFn").field("guarded", &self.pole_distance.is_some()).finish()
    }
}

/// Records how an orbit member was produced so that inverse steps can be recomputed
/// from the anchor instead of undoing floating-point arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct Lineage {
    pub rule: String,
    pub anchor: Params,
    pub anchor_index: i64,
    pub index: i64,
}

#[derive(Clone, Debug)]
pub struct StructuredR {
    name: String,
    entries: [EntryFn; 6],
    params: Params,
    grading: Grading,
    pole_guard: f64,
    lineage: Option<Lineage>,
}

impl StructuredR {
    /// Entries listed in the order `a, b, c, d, s, t`.
    pub fn new(name: impl Into<String>, entries: [EntryFn; 6], params: Params) -> Self {
        StructuredR {
            name: name.into(),
            entries,
            params,
            grading: Grading::Even,
            pole_guard: DEFAULT_POLE_GUARD,
            lineage: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn pole_guard(&self) -> f64 {
        self.pole_guard
    }

    pub fn lineage(&self) -> Option<&Lineage> {
        self.lineage.as_ref()
    }

    pub fn entry_fn(&self, e: Entry) -> &EntryFn {
        &self.entries[e.slot()]
    }

    pub fn with_params(&self, params: Params) -> Self {
        StructuredR { params, lineage: None, ..self.clone() }
    }

    pub fn with_lineage(mut self, lineage: Option<Lineage>) -> Self {
        self.lineage = lineage;
        self
    }

    pub fn with_entry(&self, e: Entry, f: EntryFn) -> Self {
        let mut out = self.clone();
        out.entries[e.slot()] = f;
        out
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_grading(mut self, grading: Grading) -> Self {
        self.grading = grading;
        self
    }

    pub fn with_pole_guard(mut self, guard: f64) -> Self {
        self.pole_guard = guard;
        self
    }

    pub fn entry(&self, e: Entry, u: C64) -> Result<C64, PoleError> {
        let f = self.entry_fn(e);
        if let Some(dist) = f.pole_distance(u, &self.params) {
            if !(dist >= self.pole_guard) {
                return Err(PoleError { entry: e, u, distance: dist });
            }
        }
        Ok(f.value(u, &self.params))
    }

    pub fn eval(&self, u: C64) -> Result<CMat, PoleError> {
        let mut m = CMat::zeros(4, 4);
        for e in Entry::ALL {
            let (r, c) = e.position();
            m[(r, c)] = self.entry(e, u)?;
        }
        Ok(m)
    }

    /// The flipped matrix `P R P`: swaps `b ↔ c` and `s ↔ t`.
    pub fn r21(&self) -> StructuredR {
        let mut out = self.clone();
        out.entries.swap(Entry::B.slot(), Entry::C.slot());
        out.entries.swap(Entry::S.slot(), Entry::T.slot());
        out.name = format!("{}_21", self.name);
        out
    }

    /// Parameters reported alongside checks on this matrix.
    pub fn report_params(&self) -> Vec<(String, C64)> {
        let mut out = self.params.named();
        out.push(("epsilon".into(), C64::new(self.grading.sign(), 0.0)));
        out
    }
}

pub fn eval_r(r: &StructuredR, u: C64) -> Result<CMat, PoleError> {
    r.eval(u)
}

pub fn r21(r: &StructuredR) -> StructuredR {
    r.r21()
}

fn trig_arg(p: &Params) -> C64 {
    p.eta * PI
}

/// `|sinh(πη(u+ħ)) / (πη)|`, which behaves like `|u + ħ|` near the pole.
fn trig_pole_distance(u: C64, p: &Params) -> f64 {
    let k = trig_arg(p);
    ((k * (u + p.hbar)).sinh() / k).norm()
}

fn rational_pole_distance(u: C64, p: &Params) -> f64 {
    (u + p.hbar).norm()
}

/// Six-vertex trigonometric R-matrix:
/// `a = d = 1`, `b = c = sinh(πηu)/sinh(πη(u+ħ))`, `s = t = sinh(πηħ)/sinh(πη(u+ħ))`.
pub fn builtin_trig(eta: C64, hbar: C64) -> Result<StructuredR, RError> {
    if eta == C64::new(0.0, 0.0) {
        return Err(RError::ZeroParameter("eta"));
    }
    if hbar == C64::new(0.0, 0.0) {
        return Err(RError::ZeroParameter("hbar"));
    }
    let one = EntryFn::constant(1.0);
    let b = EntryFn::new(|u, p| {
        let k = trig_arg(p);
        (k * u).sinh() / (k * (u + p.hbar)).sinh()
    })
    .with_pole(trig_pole_distance);
    let t = EntryFn::new(|u, p| {
        let k = trig_arg(p);
        (k * p.hbar).sinh() / (k * (u + p.hbar)).sinh()
    })
    .with_pole(trig_pole_distance);
    Ok(StructuredR::new(
        "trig",
        [one.clone(), b.clone(), b, one, t.clone(), t],
        Params::new(eta, hbar),
    ))
}

/// Rational (Yang) R-matrix: `a = d = 1`, `b = c = u/(u+ħ)`, `s = t = ħ/(u+ħ)`.
pub fn builtin_rational(hbar: C64) -> Result<StructuredR, RError> {
    if hbar == C64::new(0.0, 0.0) {
        return Err(RError::ZeroParameter("hbar"));
    }
    let one = EntryFn::constant(1.0);
    let b = EntryFn::new(|u, p| u / (u + p.hbar)).with_pole(rational_pole_distance);
    let t = EntryFn::new(|u, p| p.hbar / (u + p.hbar)).with_pole(rational_pole_distance);
    Ok(StructuredR::new(
        "rational",
        [one.clone(), b.clone(), b, one, t.clone(), t],
        Params::new(C64::new(0.0, 0.0), hbar),
    ))
}

/// `a = b = c = d = 1`, `s = t = 0`.
pub fn identity_r() -> StructuredR {
    let one = EntryFn::constant(1.0);
    let zero = EntryFn::zero();
    StructuredR::new(
        "identity",
        [one.clone(), one.clone(), one.clone(), one, zero.clone(), zero],
        Params::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
    )
}

fn scaled(res: f64, scale: f64) -> f64 {
    res / scale.max(1.0)
}

/// `‖R(u) R21(−u) − I‖_max`, relative to `max(1, ‖R(u)‖ ‖R21(−u)‖)`.
pub fn unitarity_residual(r: &StructuredR, u: C64) -> Result<f64, PoleError> {
    let m = r.eval(u)?;
    let m21 = r.r21().eval(-u)?;
    let prod = &m * &m21;
    Ok(scaled(max_abs(&(prod - identity(4))), max_abs(&m) * max_abs(&m21)))
}

pub fn ybe_residual(r: &StructuredR, u: C64, v: C64, w: C64) -> Result<f64, PoleError> {
    let i2 = identity(2);
    let p = swap23();
    let ruv = r.eval(u - v)?;
    let rvw = r.eval(v - w)?;
    let ruw = r.eval(u - w)?;
    let r12 = kron(&ruv, &i2);
    let r13 = &p * kron(&ruw, &i2) * &p;
    let r23 = kron(&i2, &rvw);
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    let scale = max_abs(&ruv) * max_abs(&rvw) * max_abs(&ruw);
    Ok(scaled(max_abs(&(lhs - rhs)), scale))
}

/// Samples `u` from the spec's box and checks `R(u) R21(−u) = I`.
pub fn check_unitarity(r: &StructuredR, spec: &SamplingSpec, tol: f64) -> CheckReport {
    let mut report = CheckReport::builder(format!("unitarity[{}]", r.name()), tol, spec.seed)
        .params(r.report_params());
    let mut sampler = spec.sampler();
    for _ in 0..spec.count {
        match sampler.draw_until(|[u]: &[C64; 1]| unitarity_residual(r, *u)) {
            Ok(([u], res)) => report.record(&[u], res, None),
            Err(e) => report.record_error(&[e.u], e.to_string()),
        }
    }
    report.finish()
}

/// Samples triples `(u, v, w)` and checks `R12(u−v) R13(u−w) R23(v−w) = R23(v−w) R13(u−w) R12(u−v)`.
pub fn check_ybe(r: &StructuredR, spec: &SamplingSpec, tol: f64) -> CheckReport {
    let mut report = CheckReport::builder(format!("ybe[{}]", r.name()), tol, spec.seed)
        .params(r.report_params());
    let mut sampler = spec.sampler();
    for _ in 0..spec.count {
        match sampler.draw_until(|[u, v, w]: &[C64; 3]| ybe_residual(r, *u, *v, *w)) {
            Ok((pts, res)) => report.record(&pts, res, None),
            Err(e) => report.record_error(&[e.u], e.to_string()),
        }
    }
    report.finish()
}

/// Conjugation by the flip of `C^2 ⊗ C^2`.
pub fn flip_conjugate(m: &CMat) -> CMat {
    let p = flip2();
    &p * m * &p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn trig() -> StructuredR {
        builtin_trig(c(1.0 / PI), c(0.3)).unwrap()
    }

    #[test]
    fn trig_at_zero_is_flip() {
        let m = trig().eval(c(0.0)).unwrap();
        assert!(max_abs(&(m - flip2())) < 1e-15);
    }

    #[test]
    fn trig_large_u() {
        let r = trig();
        let b = r.entry(Entry::B, c(10.0)).unwrap();
        let t = r.entry(Entry::T, c(10.0)).unwrap();
        assert!((b - c((-0.3f64).exp())).norm() < 1e-6);
        // t decays like 2 sinh(ħ) e^{-u-ħ}: about 2e-5 at u = 10, not below 1e-6.
        let t_oracle = 2.0 * 0.3f64.sinh() / (10.3f64.exp() - (-10.3f64).exp());
        assert!((t - c(t_oracle)).norm() < 1e-15);
        assert!(t.norm() < 1e-4);
    }

    #[test]
    fn trig_entry_at_point() {
        let b = trig().entry(Entry::B, c(0.7)).unwrap();
        assert!((b - c(0.7f64.sinh() / 1.0f64.sinh())).norm() < 1e-14);
    }

    #[test]
    fn identity_case() {
        let m = identity_r().eval(C64::new(0.4, -1.1)).unwrap();
        assert_eq!(m, identity(4));
    }

    #[test]
    fn structural_zeros_are_exact() {
        let m = trig().eval(C64::new(0.3, 0.2)).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let allowed = Entry::ALL.iter().any(|e| e.position() == (r, col));
                if !allowed {
                    assert_eq!(m[(r, col)], c(0.0));
                }
            }
        }
    }

    #[test]
    fn pole_is_rejected() {
        let r = builtin_rational(c(0.3)).unwrap();
        let err = r.eval(c(-0.3)).unwrap_err();
        assert_eq!(err.entry, Entry::B);
        assert!(err.distance < 1e-6);
    }

    #[test]
    fn zero_parameters_rejected() {
        assert_eq!(builtin_trig(c(0.0), c(0.3)).unwrap_err(), RError::ZeroParameter("eta"));
        assert_eq!(builtin_rational(c(0.0)).unwrap_err(), RError::ZeroParameter("hbar"));
    }

    #[test]
    fn rational_b_plus_t_is_one() {
        let r = builtin_rational(c(0.3)).unwrap();
        for u in [c(0.1), C64::new(-1.0, 2.0), c(5.0)] {
            let sum = r.entry(Entry::B, u).unwrap() + r.entry(Entry::T, u).unwrap();
            assert!((sum - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn scaled_t_breaks_unitarity() {
        let r = trig();
        let t2 = r.entry_fn(Entry::T).times(&EntryFn::constant(2.0));
        let bad = r.with_entry(Entry::T, t2.clone()).with_entry(Entry::S, t2);
        let rep = check_unitarity(&bad, &SamplingSpec::new(100, 3), 1e-9);
        assert!(!rep.passed());
        assert!(rep.max_residual > 0.1);
    }

    #[test]
    fn constant_d_breaks_ybe() {
        let bad = trig().with_entry(Entry::D, EntryFn::constant(1.5));
        assert!(!check_ybe(&bad, &SamplingSpec::new(20, 3), 1e-9).passed());
    }

    #[test]
    fn identity_passes_ybe_exactly() {
        let rep = check_ybe(&identity_r(), &SamplingSpec::new(10, 1), 1e-9);
        assert!(rep.passed());
        assert_eq!(rep.max_residual, 0.0);
    }

    proptest! {
        #[test]
        fn unitarity_holds_for_trig(eta in 0.05f64..1.0, hbar in 0.05f64..1.0, ur in -2.0f64..2.0, ui in -1.0f64..1.0) {
            let r = builtin_trig(c(eta), c(hbar)).unwrap();
            if let Ok(res) = unitarity_residual(&r, C64::new(ur, ui)) {
                prop_assert!(res < 1e-10);
            }
        }

        #[test]
        fn r21_is_flip_conjugation(ur in -2.0f64..2.0, ui in -2.0f64..2.0) {
            let r = trig().with_entry(Entry::S, EntryFn::new(|u, _| u * u + 1.0));
            let u = C64::new(ur, ui);
            if let (Ok(m), Ok(m21)) = (r.eval(u), r.r21().eval(u)) {
                prop_assert!(max_abs(&(m21 - flip_conjugate(&m))) < 1e-12);
                let back = r.r21().r21().eval(u).unwrap();
                prop_assert_eq!(back, m);
            }
        }
    }
}
