use std::f64::consts::PI;
use std::sync::Arc;

use rllforge::linalg::{max_abs, CMat};
use rllforge::reps::{
    antipode, aux_trace, chain_product, check_commuting, check_rll, coproduct_compose, counit, extend_transfer,
    pairing, rll_residual, trace_transfer, CoproductSign, EvalL, LOperator, RepsError, TransferChain,
};
use rllforge::rmatrix::{builtin_trig, Params, StructuredR};
use rllforge::{SamplingSpec, C64};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn trig() -> StructuredR {
    builtin_trig(c(1.0 / PI), c(0.3)).unwrap()
}

fn site(w: f64, n: i64) -> Arc<dyn LOperator> {
    Arc::new(EvalL::new(trig(), c(w), n))
}

/// The trivial representation: `L(u) = I₂` on a one-dimensional quantum space.
struct Trivial(i64);

impl LOperator for Trivial {
    fn quantum_dim(&self) -> usize {
        1
    }

    fn eval(&self, _u: C64) -> Result<CMat, RepsError> {
        Ok(CMat::identity(2, 2))
    }

    fn indices(&self) -> (i64, i64) {
        (self.0, self.0)
    }

    fn r_params(&self) -> Vec<Params> {
        Vec::new()
    }
}

fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs(&(a - b)) < tol
}

const U: C64 = C64::new(0.37, -0.21);

#[test]
fn counit_legs_are_neutral() {
    let l = site(0.1, 0);
    let right = coproduct_compose(l.clone(), Arc::new(Trivial(1)), c(0.0), c(0.0), c(0.3), CoproductSign::Plus).unwrap();
    assert!(close(&right.eval(U).unwrap(), &l.eval(U).unwrap(), 1e-15));
    let left = coproduct_compose(Arc::new(Trivial(0)), l.clone(), c(0.0), c(0.0), c(0.3), CoproductSign::Minus).unwrap();
    assert!(close(&left.eval(U).unwrap(), &l.eval(U).unwrap(), 1e-15));
    assert_eq!(counit(l.as_ref()), CMat::identity(2, 2));
}

#[test]
fn counit_leg_with_charge_shifts_the_argument() {
    let l = site(0.1, 0);
    let comp =
        coproduct_compose(l.clone(), Arc::new(Trivial(1)), c(0.0), c(2.0), c(0.3), CoproductSign::Plus).unwrap();
    assert_eq!(comp.shifts(), (c(0.15), c(0.0)));
    assert!(close(&comp.eval(U).unwrap(), &l.eval(U + 0.15).unwrap(), 1e-15));
}

#[test]
fn antipode_inverts() {
    let l = site(-0.4, 2);
    for sign in [CoproductSign::Plus, CoproductSign::Minus] {
        let s = antipode(l.as_ref(), U, sign).unwrap();
        assert!(close(&(&s.matrix * l.eval(U).unwrap()), &CMat::identity(4, 4), 1e-13));
        assert_eq!(s.index, if sign == CoproductSign::Plus { 3 } else { 1 });
    }
}

#[test]
fn coproduct_is_coassociative_without_charge() {
    let (a, b, d) = (site(0.0, 0), site(0.4, 1), site(-0.7, 2));
    let z = c(0.0);
    let h = c(0.3);
    let ab: Arc<dyn LOperator> = Arc::new(coproduct_compose(a.clone(), b.clone(), z, z, h, CoproductSign::Plus).unwrap());
    let bd: Arc<dyn LOperator> = Arc::new(coproduct_compose(b, d.clone(), z, z, h, CoproductSign::Plus).unwrap());
    let left = coproduct_compose(ab, d, z, z, h, CoproductSign::Plus).unwrap();
    let right = coproduct_compose(a, bd, z, z, h, CoproductSign::Plus).unwrap();
    assert_eq!(left.quantum_dim(), 8);
    assert!(close(&left.eval(U).unwrap(), &right.eval(U).unwrap(), 1e-13));
}

#[test]
fn centers_add() {
    let comp = coproduct_compose(site(0.0, 0), site(0.0, 1), c(0.5), c(1.25), c(0.3), CoproductSign::Minus).unwrap();
    assert_eq!(comp.center(), c(1.75));
    assert_eq!(comp.indices(), (0, 2));
    let outer =
        coproduct_compose(Arc::new(comp), site(0.0, 2), c(0.25), c(0.0), c(0.3), CoproductSign::Minus).unwrap();
    assert_eq!(outer.center(), c(2.0));
}

#[test]
fn non_consecutive_indices_are_rejected() {
    let r = coproduct_compose(site(0.0, 0), site(0.0, 3), c(0.0), c(0.0), c(0.3), CoproductSign::Plus);
    assert!(matches!(r, Err(RepsError::Index(_))));
}

#[test]
fn evaluation_and_composite_satisfy_rll() {
    let spec = SamplingSpec::new(15, 5);
    let r = trig();
    let single = EvalL::new(r.clone(), c(0.2), 0);
    let rep = check_rll(&r, &r, &single, &spec, 1e-11);
    assert!(rep.passed(), "{}", rep.to_json());
    let comp = coproduct_compose(site(0.2, 0), site(-0.5, 1), c(0.0), c(0.0), c(0.3), CoproductSign::Plus).unwrap();
    let rep = check_rll(&r, &r, &comp, &spec, 1e-11);
    assert!(rep.passed(), "{}", rep.to_json());
}

#[test]
fn rll_residual_sees_the_wrong_r_matrix() {
    let other = builtin_trig(c(1.0 / PI), c(0.5)).unwrap();
    let l = EvalL::new(trig(), c(0.0), 0);
    assert!(rll_residual(&other, &other, &l, U, c(-0.6)).unwrap() > 1e-3);
}

#[test]
fn scalar_pairing_is_one() {
    let one = CMat::from_element(1, 1, c(1.0));
    let zero = CMat::from_element(1, 1, c(0.0));
    assert_eq!(pairing(&[zero.clone(), one.clone()], &[zero, one.clone()]).unwrap(), one);
}

#[test]
fn basis_pairings_realize_the_trace() {
    let chain = vec![site(0.1, 0), site(-0.3, 1), site(0.6, 2)];
    let one = CMat::from_element(1, 1, c(1.0));
    let zero = CMat::from_element(1, 1, c(0.0));
    let e = |a: usize| if a == 0 { vec![one.clone(), zero.clone()] } else { vec![zero.clone(), one.clone()] };
    let mut sum = CMat::zeros(8, 8);
    for a in 0..2 {
        sum += TransferChain::new(e(a), chain.clone(), e(a)).unwrap().transfer(U).unwrap();
    }
    let t = trace_transfer(&chain, U).unwrap();
    assert!(t.warning.is_none());
    assert!(close(&sum, &t.matrix, 1e-14));
    assert_eq!(t.matrix, aux_trace(&chain_product(&chain, U).unwrap()).unwrap());
}

#[test]
fn extend_transfer_appends_a_site() {
    let one = CMat::from_element(1, 1, c(1.0));
    let y = vec![one.clone(), one.clone()];
    let t = TransferChain::new(y.clone(), vec![site(0.1, 0)], y.clone()).unwrap();
    let ext = extend_transfer(&t, site(0.5, 1)).unwrap();
    let direct = TransferChain::new(y.clone(), vec![site(0.1, 0), site(0.5, 1)], y).unwrap();
    assert_eq!(ext.transfer(U).unwrap(), direct.transfer(U).unwrap());
    assert!(matches!(extend_transfer(&t, site(0.5, 4)), Err(RepsError::Index(_))));
}

#[test]
fn one_site_transfer_is_diagonal() {
    let m = trace_transfer(&[site(0.0, 0)], C64::new(-0.8, 0.4)).unwrap().matrix;
    assert_eq!(m[(0, 1)], c(0.0));
    assert_eq!(m[(1, 0)], c(0.0));
}

#[test]
fn homogeneous_transfer_commutes() {
    let chain = vec![site(0.0, 0), site(0.3, 1), site(-0.9, 2)];
    let rep = check_commuting("transfer", |u| Ok(trace_transfer(&chain, u)?.matrix), &SamplingSpec::new(20, 9), 1e-11);
    assert!(rep.passed(), "{}", rep.to_json());
}

#[test]
fn mixed_chain_warns() {
    let other: Arc<dyn LOperator> = Arc::new(EvalL::new(builtin_trig(c(1.0 / PI), c(0.5)).unwrap(), c(0.0), 1));
    assert!(trace_transfer(&[site(0.0, 0), other], U).unwrap().warning.is_some());
}

#[test]
fn constant_operator_commutes() {
    let m = CMat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64));
    let rep = check_commuting("constant", |_| Ok(m.clone()), &SamplingSpec::new(5, 1), 1e-15);
    assert!(rep.passed());
}
