//! Scalar structure functions of the Drinfeld currents.
//!
//! * `Ψ_E(u) = b(−u) d(u) / (a(−u) b(u))` and `Ψ_F = 1/Ψ_E`;
//! * `Φ(u) = t(u) / b(u)`;
//! * `N = lim_{u→0} u Φ(u)`, the weight of `δ(u)` in `Φ⁺ − Φ⁻`.

use thiserror::Error;

use crate::report::CheckReport;
use crate::rmatrix::{Entry, PoleError, StructuredR};
use crate::sampling::SamplingSpec;
use crate::C64;

/// Points used to extrapolate `u Φ(u)` to `u = 0`.
pub const RESIDUE_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Normalization convention for the delta-function coefficient.
pub const N_CONVENTION: &str = "residue: N = lim_{u->0} u*Phi(u), constants absorbed into delta";

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CurrentsError {
    #[error(transparent)]
    Pole(#[from] PoleError),
    #[error("u = {u} is within {guard:.1e} of the removable point u = 0")]
    NearZero { u: C64, guard: f64 },
    #[error("{0} vanishes in a denominator")]
    ZeroDenominator(&'static str),
    #[error("u*Phi(u) does not settle as u -> 0 (estimates {coarse} and {fine})")]
    NotSimplePole { coarse: C64, fine: C64 },
}

fn guard_zero(r: &StructuredR, u: C64) -> Result<(), CurrentsError> {
    if !(u.norm() > r.pole_guard()) {
        return Err(CurrentsError::NearZero { u, guard: r.pole_guard() });
    }
    Ok(())
}

fn divide(num: C64, den: C64, what: &'static str) -> Result<C64, CurrentsError> {
    if den == C64::new(0.0, 0.0) {
        return Err(CurrentsError::ZeroDenominator(what));
    }
    Ok(num / den)
}

pub fn psi_e(r: &StructuredR, u: C64) -> Result<C64, CurrentsError> {
    guard_zero(r, u)?;
    let num = r.entry(Entry::B, -u)? * r.entry(Entry::D, u)?;
    let den = r.entry(Entry::A, -u)? * r.entry(Entry::B, u)?;
    divide(num, den, "a(-u) b(u)")
}

pub fn psi_f(r: &StructuredR, u: C64) -> Result<C64, CurrentsError> {
    guard_zero(r, u)?;
    let num = r.entry(Entry::A, -u)? * r.entry(Entry::B, u)?;
    let den = r.entry(Entry::B, -u)? * r.entry(Entry::D, u)?;
    divide(num, den, "b(-u) d(u)")
}

pub fn phi(r: &StructuredR, u: C64) -> Result<C64, CurrentsError> {
    guard_zero(r, u)?;
    divide(r.entry(Entry::T, u)?, r.entry(Entry::B, u)?, "b(u)")
}

/// `lim u Φ(u)` by two rounds of Richardson extrapolation over [`RESIDUE_STEPS`].
pub fn delta_normalization(r: &StructuredR) -> Result<C64, CurrentsError> {
    let g: Vec<C64> = RESIDUE_STEPS
        .iter()
        .map(|&h| phi(r, C64::new(h, 0.0)).map(|p| p * h))
        .collect::<Result<_, _>>()?;
    // steps shrink by 10; the error expansion is in powers of h
    let coarse = (g[1] * 10.0 - g[0]) / 9.0;
    let fine = (g[2] * 10.0 - g[1]) / 9.0;
    let n = (fine * 100.0 - coarse) / 99.0;
    let scale = n.norm().max(1.0);
    if !((fine - coarse).norm() <= 1e-6 * scale) {
        return Err(CurrentsError::NotSimplePole { coarse, fine });
    }
    Ok(n)
}

/// `Ψ_E`, `Ψ_F`, `Φ` bound to one R-matrix, with its delta normalization.
#[derive(Clone, Debug)]
pub struct StructureFunctionSet {
    r: StructuredR,
    pub n: C64,
}

impl StructureFunctionSet {
    pub fn new(r: &StructuredR) -> Result<Self, CurrentsError> {
        Ok(StructureFunctionSet { r: r.clone(), n: delta_normalization(r)? })
    }

    pub fn psi_e(&self, u: C64) -> Result<C64, CurrentsError> {
        psi_e(&self.r, u)
    }

    pub fn psi_f(&self, u: C64) -> Result<C64, CurrentsError> {
        psi_f(&self.r, u)
    }

    pub fn phi(&self, u: C64) -> Result<C64, CurrentsError> {
        phi(&self.r, u)
    }
}

/// Worst of `|Ψ_E(u) Ψ_E(−u) − 1|` and `|Ψ_F(u) Ψ_E(u) − 1|`, each relative to the
/// magnitude of the product.
pub fn psi_residual(r: &StructuredR, u: C64) -> Result<f64, CurrentsError> {
    let pu = psi_e(r, u)?;
    let pm = psi_e(r, -u)?;
    let fu = psi_f(r, u)?;
    let rel = |x: C64, y: C64| (x * y - 1.0).norm() / (x.norm() * y.norm()).max(1.0);
    Ok(rel(pu, pm).max(rel(fu, pu)))
}

pub fn check_psi_compatibility(r: &StructuredR, spec: &SamplingSpec, tol: f64) -> CheckReport {
    let mut report = CheckReport::builder(format!("psi_compatibility[{}]", r.name()), tol, spec.seed)
        .params(r.report_params());
    let mut sampler = spec.sampler();
    for _ in 0..spec.count {
        match sampler.draw_until(|[u]: &[C64; 1]| psi_residual(r, *u)) {
            Ok(([u], res)) => report.record(&[u], res, None),
            Err(e) => report.record_error(&[], e.to_string()),
        }
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::{builtin_rational, builtin_trig, EntryFn};
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn rational_phi_and_n() {
        let r = builtin_rational(c(0.3)).unwrap();
        let u = C64::new(0.4, 0.9);
        assert!((phi(&r, u).unwrap() - c(0.3) / u).norm() < 1e-14);
        assert!((delta_normalization(&r).unwrap() - c(0.3)).norm() < 1e-10);
    }

    #[test]
    fn zero_t_gives_zero_n() {
        let r = builtin_trig(c(1.0 / PI), c(0.3)).unwrap().with_entry(Entry::T, EntryFn::zero());
        assert_eq!(delta_normalization(&r).unwrap(), c(0.0));
    }

    #[test]
    fn double_pole_is_rejected() {
        let r = builtin_rational(c(0.3))
            .unwrap()
            .with_entry(Entry::T, EntryFn::new(|u, p| p.hbar / (u * (u + p.hbar))));
        assert!(matches!(delta_normalization(&r), Err(CurrentsError::NotSimplePole { .. })));
    }

    #[test]
    fn zero_is_guarded() {
        let r = builtin_rational(c(0.3)).unwrap();
        assert!(matches!(psi_e(&r, c(1e-9)), Err(CurrentsError::NearZero { .. })));
        assert!(matches!(phi(&r, c(0.0)), Err(CurrentsError::NearZero { .. })));
    }

    #[test]
    fn psi_near_zero_tends_to_minus_one() {
        let r = builtin_trig(c(1.0 / PI), c(0.3)).unwrap();
        assert!((psi_e(&r, c(1e-6 * 1.5)).unwrap() + 1.0).norm() < 1e-4);
    }
}
