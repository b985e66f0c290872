//! Sampled verification that the expanded relations reduce to zero.

use serde::{Deserialize, Serialize};

use super::expand::{expand_components, ExpandError, SignPair};
use super::ncpoly::{word_string, NCPoly};
use super::reduce::{reduce, ReduceError, Reduction, Strategy};
use super::rules::{Faults, RuleError, RuleSet};
use super::symbols::{Kind, Pm, Symbol, Tag, TagTable};
use crate::family::{FamilyError, FamilyOrbit};
use crate::report::{CheckReport, ReportBuilder};
use crate::rmatrix::{Entry, Grading, StructuredR};
use crate::sampling::SamplingSpec;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub sign_pairs: Vec<SignPair>,
    /// Also compare leftmost and randomized reduction orders.
    pub cross_order: bool,
    #[serde(skip)]
    pub faults: Faults,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { sign_pairs: SignPair::ALL.to_vec(), cross_order: true, faults: Faults::default() }
    }
}

/// Why a sample point produced no residual. `Resample` covers coefficient poles,
/// which depend on the drawn point; `Fatal` covers everything else.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleError {
    Resample(String),
    Fatal(String),
}

impl From<RuleError> for SampleError {
    fn from(e: RuleError) -> Self {
        SampleError::Resample(e.to_string())
    }
}

impl From<ExpandError> for SampleError {
    fn from(e: ExpandError) -> Self {
        match e {
            ExpandError::Pole { .. } => SampleError::Resample(e.to_string()),
            _ => SampleError::Fatal(e.to_string()),
        }
    }
}

impl From<ReduceError> for SampleError {
    fn from(e: ReduceError) -> Self {
        match e {
            ReduceError::Rule(r) => r.into(),
            ReduceError::Budget { .. } => SampleError::Fatal(e.to_string()),
        }
    }
}

/// Worst outcome over one sample point.
#[derive(Default)]
struct Worst {
    residual: f64,
    detail: Option<String>,
}

impl Worst {
    fn update(&mut self, residual: f64, detail: impl FnOnce() -> String) {
        if residual > self.residual || (residual.is_nan() && !self.residual.is_nan()) {
            self.residual = residual;
            self.detail = Some(detail());
        }
    }
}

fn leading_term(p: &NCPoly) -> String {
    p.terms()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(w, c)| format!("word {} coefficient {:.3e}", word_string(w), c.norm()))
        .unwrap_or_else(|| "zero".into())
}

fn members(orbit: &FamilyOrbit, i: i64, j: i64) -> Result<(StructuredR, StructuredR), FamilyError> {
    Ok((orbit.member(i)?, orbit.member(j)?))
}

fn error_report(name: &str, spec: &SamplingSpec, tol: f64, msg: String) -> CheckReport {
    let mut b = CheckReport::builder(name, tol, spec.seed);
    b.record_error(&[], msg);
    b.finish()
}

fn with_params(b: ReportBuilder, orbit: &FamilyOrbit, i: i64, j: i64, grading: Grading, c: C64) -> ReportBuilder {
    b.param("i", C64::new(i as f64, 0.0))
        .param("j", C64::new(j as f64, 0.0))
        .param("epsilon", C64::new(grading.sign(), 0.0))
        .param("c", c)
        .params(orbit.base().params().named().into_iter().map(|(k, v)| (format!("base.{k}"), v)))
}

/// Draws `(u, v)`; for mixed signs the pair is ordered so that `|u| < |v|`.
fn tag_values(pts: &[C64; 2], mixed: bool) -> Vec<C64> {
    let (u, v) = (pts[0], pts[1]);
    if mixed && u.norm() > v.norm() {
        vec![v, u]
    } else {
        vec![u, v]
    }
}

/// Checks that all 16 components of every requested sign pair reduce to zero.
pub fn verify_components(
    orbit: &FamilyOrbit,
    i: i64,
    j: i64,
    grading: Grading,
    spec: &SamplingSpec,
    tol: f64,
) -> CheckReport {
    verify_components_with(orbit, i, j, grading, spec, tol, &VerifyOptions::default())
}

pub fn verify_components_with(
    orbit: &FamilyOrbit,
    i: i64,
    j: i64,
    grading: Grading,
    spec: &SamplingSpec,
    tol: f64,
    opts: &VerifyOptions,
) -> CheckReport {
    let name = "rll_components";
    let (ri, rj) = match members(orbit, i, j) {
        Ok(m) => m,
        Err(e) => return error_report(name, spec, tol, e.to_string()),
    };
    let c = orbit.central_sum(i, j);
    let hbar = ri.params().hbar;
    let mut main = with_params(CheckReport::builder(name, tol, spec.seed), orbit, i, j, grading, c);
    let mut cross = CheckReport::builder("cross_order", tol, spec.seed);
    let mut sampler = spec.sampler();
    for sample in 0..spec.count {
        let outcome = sampler.draw_until(|pts: &[C64; 2]| {
            let mut worst = Worst::default();
            let mut worst_cross = Worst::default();
            for &pair in &opts.sign_pairs {
                let table = TagTable::with_charge(tag_values(pts, pair == SignPair::PlusMinus), hbar, c);
                let rules = RuleSet::new(ri.clone(), rj.clone(), grading, table.clone()).with_faults(opts.faults);
                let comps = expand_components(&ri, &rj, grading, pair, Tag::new(0, 0), Tag::new(1, 0), &table)?;
                for comp in &comps {
                    let red = reduce(&comp.difference(), &rules, Strategy::Leftmost)?;
                    worst.update(red.relative_residual(), || {
                        format!("component {} sign pair {}: {}", comp.label(), pair.label(), leading_term(&red.poly))
                    });
                    if opts.cross_order {
                        let seed = spec.seed ^ ((sample as u64) << 8) ^ 0x5eed;
                        let res = cross_order_residual(&comp.lhs, &rules, seed)?;
                        worst_cross.update(res, || {
                            format!("component {} sign pair {}: orders disagree", comp.label(), pair.label())
                        });
                    }
                }
            }
            Ok::<_, SampleError>((worst, worst_cross))
        });
        match outcome {
            Ok((pts, (w, wc))) => {
                let values = tag_values(&pts, false);
                main.record(&values, w.residual, w.detail);
                if opts.cross_order {
                    cross.record(&values, wc.residual, wc.detail);
                }
            }
            Err(SampleError::Resample(msg)) | Err(SampleError::Fatal(msg)) => main.record_error(&[], msg),
        }
    }
    if opts.cross_order {
        CheckReport::merge(name, &[main.finish(), cross.finish()])
    } else {
        main.finish()
    }
}

/// Normal forms of `p` under leftmost and randomized orders, compared relative to the
/// largest intermediate coefficient.
pub fn cross_order_residual(p: &NCPoly, rules: &RuleSet, seed: u64) -> Result<f64, ReduceError> {
    let a: Reduction = reduce(p, rules, Strategy::Leftmost)?;
    let b: Reduction = reduce(p, rules, Strategy::Random(seed))?;
    let scale = a.max_intermediate.max(b.max_intermediate);
    let diff = a.poly.distance(&b.poly);
    Ok(if diff == 0.0 { 0.0 } else { diff / scale })
}

/// `E(x) = e⁺(x − m q) − e⁻(x + m q)` where `m` is the shift multiplier.
pub fn e_total(tag: Tag, m: i32) -> NCPoly {
    &NCPoly::sym(Symbol::e(Pm::Plus, tag.shifted(-m))) - &NCPoly::sym(Symbol::e(Pm::Minus, tag.shifted(m)))
}

/// `F(x) = f⁺(x + m q) − f⁻(x − m q)`.
pub fn f_total(tag: Tag, m: i32) -> NCPoly {
    &NCPoly::sym(Symbol::f(Pm::Plus, tag.shifted(m))) - &NCPoly::sym(Symbol::f(Pm::Minus, tag.shifted(-m)))
}

pub const EF_RELATIONS: [&str; 8] = ["ke1", "ke2", "ke3", "ke4", "kf1", "kf2", "kf3", "kf4"];

/// The `k`–`E`/`F` exchange relation `name` at `(u, v)` written as a polynomial that
/// must vanish. `m` scales the shift used inside `E` and `F`; the relation
/// coefficients always use the true quantum `q`.
pub fn ef_relation(name: &str, ri: &StructuredR, rj: &StructuredR, table: &TagTable, m: i32) -> Result<NCPoly, SampleError> {
    let (tu, tv) = (Tag::new(0, 0), Tag::new(1, 0));
    let (u, v, q) = (table.values[0], table.values[1], table.q);
    let (v_minus, v_plus) = (v - q, v + q);
    let ent = |r: &StructuredR, e: Entry, z: C64| {
        r.entry(e, z).map_err(|err| SampleError::Resample(format!("{name}: {err}")))
    };
    let k = |kind: Kind, sign: Pm, t: Tag| NCPoly::sym(Symbol::new(kind, sign, t));
    let rel = |c1: C64, x: NCPoly, y: NCPoly, c2: C64| (&x * &y).scale(c1) - (&y * &x).scale(c2);
    let poly = match name {
        "ke1" => {
            let z = u - v_minus;
            rel(ent(rj, Entry::A, z)?, k(Kind::K1, Pm::Plus, tu), e_total(tv, m), ent(rj, Entry::B, z)?)
        }
        "ke2" => {
            let z = u - v_plus;
            rel(ent(ri, Entry::B, z)?, k(Kind::K1, Pm::Plus, tu), f_total(tv, m), ent(ri, Entry::A, z)?)
        }
        "ke3" => {
            let z = v_minus - u;
            rel(ent(rj, Entry::B, z)?, e_total(tu, m), k(Kind::K1, Pm::Minus, tv), ent(rj, Entry::A, z)?)
        }
        "ke4" => {
            let z = v_plus - u;
            rel(ent(ri, Entry::B, z)?, k(Kind::K1, Pm::Minus, tv), f_total(tu, m), ent(ri, Entry::A, z)?)
        }
        "kf1" => {
            let z = v_minus - u;
            rel(ent(rj, Entry::B, z)?, e_total(tv, m), k(Kind::K2, Pm::Plus, tu), ent(rj, Entry::D, z)?)
        }
        "kf2" => {
            let z = v_plus - u;
            rel(ent(ri, Entry::D, z)?, f_total(tv, m), k(Kind::K2, Pm::Plus, tu), ent(ri, Entry::B, z)?)
        }
        "kf3" => {
            let z = u - v_minus;
            rel(ent(rj, Entry::B, z)?, e_total(tu, m), k(Kind::K2, Pm::Minus, tv), ent(rj, Entry::D, z)?)
        }
        "kf4" => {
            let z = u - v_plus;
            rel(ent(ri, Entry::D, z)?, f_total(tu, m), k(Kind::K2, Pm::Minus, tv), ent(ri, Entry::B, z)?)
        }
        other => return Err(SampleError::Fatal(format!("unknown relation {other}"))),
    };
    Ok(poly)
}

/// Checks the eight `k`–`E`/`F` exchange relations with `E`, `F` built from the
/// shifted Gauss currents.
pub fn verify_ef_relations(
    orbit: &FamilyOrbit,
    i: i64,
    j: i64,
    grading: Grading,
    c: C64,
    spec: &SamplingSpec,
    tol: f64,
) -> CheckReport {
    verify_ef_relations_with(orbit, i, j, grading, c, spec, tol, 1)
}

#[allow(clippy::too_many_arguments)]
pub fn verify_ef_relations_with(
    orbit: &FamilyOrbit,
    i: i64,
    j: i64,
    grading: Grading,
    c: C64,
    spec: &SamplingSpec,
    tol: f64,
    shift_multiplier: i32,
) -> CheckReport {
    let name = "ef_relations";
    let (ri, rj) = match members(orbit, i, j) {
        Ok(m) => m,
        Err(e) => return error_report(name, spec, tol, e.to_string()),
    };
    let hbar = ri.params().hbar;
    let mut report = with_params(CheckReport::builder(name, tol, spec.seed), orbit, i, j, grading, c)
        .param("shift_multiplier", C64::new(shift_multiplier as f64, 0.0));
    let mut sampler = spec.sampler();
    for _ in 0..spec.count {
        let outcome = sampler.draw_until(|pts: &[C64; 2]| {
            let table = TagTable::with_charge(pts.to_vec(), hbar, c);
            let rules = RuleSet::new(ri.clone(), rj.clone(), grading, table.clone());
            let mut worst = Worst::default();
            for rel in EF_RELATIONS {
                let poly = ef_relation(rel, &ri, &rj, &table, shift_multiplier)?;
                let red = reduce(&poly, &rules, Strategy::Leftmost)?;
                worst.update(red.relative_residual(), || format!("{rel}: {}", leading_term(&red.poly)));
            }
            Ok::<_, SampleError>(worst)
        });
        match outcome {
            Ok((pts, w)) => report.record(&pts, w.residual, w.detail),
            Err(SampleError::Resample(msg)) | Err(SampleError::Fatal(msg)) => report.record_error(&[], msg),
        }
    }
    report.finish()
}
