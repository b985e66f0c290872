//! Evaluation L-operators, family coproduct data and commuting transfer operators.
//!
//! An L-operator with quantum space of dimension `d` is stored as a `2d × 2d` matrix
//! in aux-major order: row `(a, α)` sits at `a·d + α`, so the block at `(a, b)` is the
//! quantum-space operator `L_ab`.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{identity, kron, max_abs, relative_commutator, CMat};
use crate::report::CheckReport;
use crate::rmatrix::{Params, PoleError, StructuredR};
use crate::sampling::SamplingSpec;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RepsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("family indices are not consecutive: {0}")]
    Index(String),
    #[error("L(u) is singular at u = {0}")]
    Singular(C64),
    #[error(transparent)]
    Pole(#[from] PoleError),
}

pub trait LOperator: Send + Sync {
    fn quantum_dim(&self) -> usize;

    fn eval(&self, u: C64) -> Result<CMat, RepsError>;

    /// Family indices `(n, m)` of the R-matrices this operator intertwines.
    fn indices(&self) -> (i64, i64);

    /// Accumulated central charge.
    fn center(&self) -> C64 {
        C64::new(0.0, 0.0)
    }

    /// Parameters of every R-matrix the operator is built from, in chain order.
    fn r_params(&self) -> Vec<Params>;
}

/// `L(u) = R(u − w)` acting on one auxiliary and one two-dimensional quantum space.
#[derive(Clone, Debug)]
pub struct EvalL {
    r: StructuredR,
    w: C64,
    n: i64,
}

impl EvalL {
    pub fn new(r: StructuredR, w: C64, n: i64) -> Self {
        EvalL { r, w, n }
    }

    pub fn r(&self) -> &StructuredR {
        &self.r
    }

    pub fn inhomogeneity(&self) -> C64 {
        self.w
    }
}

impl LOperator for EvalL {
    fn quantum_dim(&self) -> usize {
        2
    }

    /// `(L_ab)_{cd} = R_{(ac),(bd)}`, which in aux-major order is `R` itself.
    fn eval(&self, u: C64) -> Result<CMat, RepsError> {
        Ok(self.r.eval(u - self.w)?)
    }

    fn indices(&self) -> (i64, i64) {
        (self.n, self.n + 1)
    }

    fn r_params(&self) -> Vec<Params> {
        vec![self.r.params().clone()]
    }
}

/// `(A ⊗̇ B)_{(a, αβ), (b, α'β')} = Σ_c A_{(a α), (c α')} B_{(c β), (b β')}`.
pub fn dot_tensor(a: &CMat, b: &CMat) -> Result<CMat, RepsError> {
    let (da, db) = (quantum_dim_of(a)?, quantum_dim_of(b)?);
    let d = da * db;
    let mut out = CMat::zeros(2 * d, 2 * d);
    for x in 0..2 {
        for y in 0..2 {
            let mut block = CMat::zeros(d, d);
            for c in 0..2 {
                let ab = a.view((x * da, c * da), (da, da)).into_owned();
                let bb = b.view((c * db, y * db), (db, db)).into_owned();
                block += kron(&ab, &bb);
            }
            out.view_mut((x * d, y * d), (d, d)).copy_from(&block);
        }
    }
    Ok(out)
}

fn quantum_dim_of(m: &CMat) -> Result<usize, RepsError> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(RepsError::Dimension(format!("{}x{} is not an L-operator matrix", m.nrows(), m.ncols())));
    }
    Ok(m.nrows() / 2)
}

/// Traces out the auxiliary space.
pub fn aux_trace(m: &CMat) -> Result<CMat, RepsError> {
    let d = quantum_dim_of(m)?;
    Ok(m.view((0, 0), (d, d)).into_owned() + m.view((d, d), (d, d)))
}

/// Quantum-space block `L_ab`.
pub fn aux_block(m: &CMat, a: usize, b: usize) -> Result<CMat, RepsError> {
    let d = quantum_dim_of(m)?;
    Ok(m.view((a * d, b * d), (d, d)).into_owned())
}

/// Coproduct image `La(u + s_a) ⊗̇ Lb(u + s_b)` on the product of the two quantum spaces.
pub struct Composite {
    a: Arc<dyn LOperator>,
    b: Arc<dyn LOperator>,
    shift_a: C64,
    shift_b: C64,
    center: C64,
}

impl Composite {
    pub fn shifts(&self) -> (C64, C64) {
        (self.shift_a, self.shift_b)
    }
}

impl LOperator for Composite {
    fn quantum_dim(&self) -> usize {
        self.a.quantum_dim() * self.b.quantum_dim()
    }

    fn eval(&self, u: C64) -> Result<CMat, RepsError> {
        dot_tensor(&self.a.eval(u + self.shift_a)?, &self.b.eval(u + self.shift_b)?)
    }

    fn indices(&self) -> (i64, i64) {
        (self.a.indices().0, self.b.indices().1)
    }

    fn center(&self) -> C64 {
        self.center
    }

    fn r_params(&self) -> Vec<Params> {
        let mut v = self.a.r_params();
        v.extend(self.b.r_params());
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoproductSign {
    Plus,
    Minus,
}

/// `Δ^± L(u) = La(u ± ħ c_{n+1}/4) ⊗̇ Lb(u ∓ ħ c_n/4)`, with center `c_n + c_{n+1}`.
pub fn coproduct_compose(
    la: Arc<dyn LOperator>,
    lb: Arc<dyn LOperator>,
    cn: C64,
    cn1: C64,
    hbar: C64,
    sign: CoproductSign,
) -> Result<Composite, RepsError> {
    if la.indices().1 != lb.indices().0 {
        return Err(RepsError::Index(format!("{:?} followed by {:?}", la.indices(), lb.indices())));
    }
    let s = match sign {
        CoproductSign::Plus => 1.0,
        CoproductSign::Minus => -1.0,
    };
    Ok(Composite {
        shift_a: hbar * cn1 / 4.0 * s,
        shift_b: -hbar * cn / 4.0 * s,
        center: cn + cn1 + la.center() + lb.center(),
        a: la,
        b: lb,
    })
}

/// `ε(L_ab) = δ_ab`: the auxiliary identity on a one-dimensional quantum space.
pub fn counit(_l: &dyn LOperator) -> CMat {
    identity(2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Antipode {
    pub matrix: CMat,
    pub index: i64,
}

/// `L(u)⁻¹`, tagged with the neighbouring family index in the direction of `sign`.
pub fn antipode(l: &dyn LOperator, u: C64, sign: CoproductSign) -> Result<Antipode, RepsError> {
    let m = l.eval(u)?;
    let inv = m.try_inverse().ok_or(RepsError::Singular(u))?;
    let n = l.indices().0;
    let index = match sign {
        CoproductSign::Plus => n + 1,
        CoproductSign::Minus => n - 1,
    };
    Ok(Antipode { matrix: inv, index })
}

/// Product `L_1(u) ⊗̇ … ⊗̇ L_k(u)`; the empty chain gives the counit.
pub fn chain_product(chain: &[Arc<dyn LOperator>], u: C64) -> Result<CMat, RepsError> {
    let mut acc = identity(2);
    for l in chain {
        acc = dot_tensor(&acc, &l.eval(u)?)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferValue {
    pub matrix: CMat,
    /// Set when the chain mixes different R-matrices, where the trace need not commute.
    pub warning: Option<String>,
}

pub fn trace_transfer(chain: &[Arc<dyn LOperator>], u: C64) -> Result<TransferValue, RepsError> {
    let m = aux_trace(&chain_product(chain, u)?)?;
    let params: Vec<Params> = chain.iter().flat_map(|l| l.r_params()).collect();
    let warning = if params.windows(2).all(|w| w[0] == w[1]) {
        None
    } else {
        Some("chain mixes different R-matrices; trace commutativity is not guaranteed".into())
    };
    Ok(TransferValue { matrix: m, warning })
}

fn check_components(y: &[CMat], x: &[CMat]) -> Result<(), RepsError> {
    if y.len() != 2 || x.len() != 2 {
        return Err(RepsError::Dimension(format!("expected 2 components each, got {} and {}", y.len(), x.len())));
    }
    for v in [y, x] {
        if v[0].shape() != v[1].shape() {
            return Err(RepsError::Dimension("components of one vector differ in shape".into()));
        }
    }
    Ok(())
}

/// `⟨Y, X⟩ = Σ_a Y_a ⊗ X^a`.
pub fn pairing(y: &[CMat], x: &[CMat]) -> Result<CMat, RepsError> {
    check_components(y, x)?;
    Ok(kron(&y[0], &x[0]) + kron(&y[1], &x[1]))
}

/// `⟨Y, L ⊗̇ … ⊗̇ L ⊗̇ X⟩` with constant covector and vector data.
#[derive(Clone)]
pub struct TransferChain {
    pub y: Vec<CMat>,
    pub chain: Vec<Arc<dyn LOperator>>,
    pub x: Vec<CMat>,
}

impl TransferChain {
    pub fn new(y: Vec<CMat>, chain: Vec<Arc<dyn LOperator>>, x: Vec<CMat>) -> Result<Self, RepsError> {
        check_components(&y, &x)?;
        for w in chain.windows(2) {
            if w[0].indices().1 != w[1].indices().0 {
                return Err(RepsError::Index(format!("{:?} followed by {:?}", w[0].indices(), w[1].indices())));
            }
        }
        Ok(TransferChain { y, chain, x })
    }

    /// `Σ_{a,b} Y_a ⊗ T_ab(u) ⊗ X^b`.
    pub fn transfer(&self, u: C64) -> Result<CMat, RepsError> {
        let t = chain_product(&self.chain, u)?;
        let mut out: Option<CMat> = None;
        for a in 0..2 {
            for b in 0..2 {
                let term = kron(&kron(&self.y[a], &aux_block(&t, a, b)?), &self.x[b]);
                out = Some(match out {
                    None => term,
                    Some(acc) => acc + term,
                });
            }
        }
        Ok(out.expect("four terms"))
    }
}

/// Inserts one more L-operator before `X`, as the comorphism step does.
pub fn extend_transfer(t: &TransferChain, l: Arc<dyn LOperator>) -> Result<TransferChain, RepsError> {
    if let Some(last) = t.chain.last() {
        if last.indices().1 != l.indices().0 {
            return Err(RepsError::Index(format!("{:?} followed by {:?}", last.indices(), l.indices())));
        }
    }
    let mut chain = t.chain.clone();
    chain.push(l);
    TransferChain::new(t.y.clone(), chain, t.x.clone())
}

/// Samples pairs `(u, v)` and reports `‖[T(u), T(v)]‖ / ‖T(u) T(v)‖`.
pub fn check_commuting<F>(name: &str, t: F, spec: &SamplingSpec, tol: f64) -> CheckReport
where
    F: Fn(C64) -> Result<CMat, RepsError>,
{
    let mut report = CheckReport::builder(name, tol, spec.seed);
    let mut sampler = spec.sampler();
    for _ in 0..spec.count {
        match sampler.draw_until(|[u, v]: &[C64; 2]| Ok::<_, RepsError>(relative_commutator(&t(*u)?, &t(*v)?))) {
            Ok((pts, res)) => report.record(&pts, res, None),
            Err(e) => report.record_error(&[], e.to_string()),
        }
    }
    report.finish()
}

/// Embeds an L-operator matrix as `L_1` or `L_2` on `aux ⊗ aux ⊗ quantum`.
fn embed(l: &CMat, slot: usize) -> Result<CMat, RepsError> {
    let d = quantum_dim_of(l)?;
    let mut out = CMat::zeros(4 * d, 4 * d);
    for a1 in 0..2 {
        for a2 in 0..2 {
            for b1 in 0..2 {
                for b2 in 0..2 {
                    let (keep, a, b) = if slot == 1 { (a2 == b2, a1, b1) } else { (a1 == b1, a2, b2) };
                    if !keep {
                        continue;
                    }
                    let block = l.view((a * d, b * d), (d, d));
                    out.view_mut(((2 * a1 + a2) * d, (2 * b1 + b2) * d), (d, d)).copy_from(&block);
                }
            }
        }
    }
    Ok(out)
}

/// `‖R_i(u−v) L_1(u) L_2(v) − L_2(v) L_1(u) R_j(u−v)‖_max`, relative to the size of the terms.
pub fn rll_residual(ri: &StructuredR, rj: &StructuredR, l: &dyn LOperator, u: C64, v: C64) -> Result<f64, RepsError> {
    let (lu, lv) = (l.eval(u)?, l.eval(v)?);
    let d = quantum_dim_of(&lu)?;
    let id = identity(d);
    let rim = kron(&ri.eval(u - v)?, &id);
    let rjm = kron(&rj.eval(u - v)?, &id);
    let (l1, l2) = (embed(&lu, 1)?, embed(&lv, 2)?);
    let lhs = &rim * &l1 * &l2;
    let rhs = &l2 * &l1 * &rjm;
    let scale = max_abs(&lhs).max(max_abs(&rhs)).max(1.0);
    Ok(max_abs(&(lhs - rhs)) / scale)
}

pub fn check_rll(ri: &StructuredR, rj: &StructuredR, l: &dyn LOperator, spec: &SamplingSpec, tol: f64) -> CheckReport {
    let mut report = CheckReport::builder("rll_operator", tol, spec.seed).params(ri.report_params());
    let mut sampler = spec.sampler();
    for _ in 0..spec.count {
        match sampler.draw_until(|[u, v]: &[C64; 2]| rll_residual(ri, rj, l, *u, *v)) {
            Ok((pts, res)) => report.record(&pts, res, None),
            Err(e) => report.record_error(&[], e.to_string()),
        }
    }
    report.finish()
}

/// Residual of `R(u−v) X_1(u) X_2(v) = X_2(v) X_1(u)` for vector data `X(u) = (X^1, X^2)`.
pub fn rxx_residual<F>(r: &StructuredR, x: F, u: C64, v: C64) -> Result<f64, RepsError>
where
    F: Fn(C64) -> Vec<CMat>,
{
    let (xu, xv) = (x(u), x(v));
    let rm = r.eval(u - v)?;
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let mut lhs = CMat::zeros(xu[0].nrows(), xu[0].ncols());
            for p in 0..2 {
                for q in 0..2 {
                    lhs += (&xu[p] * &xv[q]) * rm[(2 * a + b, 2 * p + q)];
                }
            }
            let rhs = &xv[b] * &xu[a];
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
    }
    Ok(worst)
}

/// Residual of `Y_1(v) Y_2(u) R(v−u) = Y_2(u) Y_1(v)` for covector data `Y(u) = (Y_1, Y_2)`.
pub fn ryy_residual<F>(r: &StructuredR, y: F, u: C64, v: C64) -> Result<f64, RepsError>
where
    F: Fn(C64) -> Vec<CMat>,
{
    let (yu, yv) = (y(u), y(v));
    let rm = r.eval(v - u)?;
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let mut lhs = CMat::zeros(yu[0].nrows(), yu[0].ncols());
            for p in 0..2 {
                for q in 0..2 {
                    lhs += (&yv[p] * &yu[q]) * rm[(2 * p + q, 2 * a + b)];
                }
            }
            let rhs = &yu[b] * &yv[a];
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::builtin_trig;
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn site(w: f64) -> Arc<dyn LOperator> {
        Arc::new(EvalL::new(builtin_trig(c(1.0 / PI), c(0.3)).unwrap(), c(w), 0))
    }

    #[test]
    fn dot_tensor_with_counit_is_neutral() {
        let l = site(0.2).eval(C64::new(0.4, 0.1)).unwrap();
        let one = identity(2);
        assert!(max_abs(&(dot_tensor(&one, &l).unwrap() - &l)) < 1e-15);
        assert!(max_abs(&(dot_tensor(&l, &one).unwrap() - &l)) < 1e-15);
    }

    #[test]
    fn one_site_trace_is_diagonal() {
        let t = trace_transfer(&[site(0.0)], C64::new(0.3, -0.7)).unwrap();
        assert!(t.warning.is_none());
        for i in 0..2 {
            for j in 0..2 {
                if i != j {
                    assert_eq!(t.matrix[(i, j)], c(0.0));
                }
            }
        }
    }

    #[test]
    fn scalar_pairing() {
        let one = CMat::from_element(1, 1, c(1.0));
        let zero = CMat::from_element(1, 1, c(0.0));
        let p = pairing(&[one.clone(), zero.clone()], &[one.clone(), zero]).unwrap();
        assert_eq!(p, one);
    }

    #[test]
    fn pairing_checks_component_count() {
        let one = CMat::from_element(1, 1, c(1.0));
        assert!(matches!(pairing(&[one.clone()], &[one.clone(), one]), Err(RepsError::Dimension(_))));
    }

    #[test]
    fn antipode_index_shifts() {
        let l = EvalL::new(builtin_trig(c(1.0 / PI), c(0.3)).unwrap(), c(0.0), 3);
        let s = antipode(&l, c(0.5), CoproductSign::Plus).unwrap();
        assert_eq!(s.index, 4);
        let l2 = EvalL::new(l.r().clone(), c(0.0), s.index);
        assert_eq!(antipode(&l2, c(0.5), CoproductSign::Plus).unwrap().index, 5);
    }
}
