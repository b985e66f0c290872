use std::f64::consts::PI;

use rllforge::linalg::CMat;
use rllforge::rmatrix::{
    builtin_rational, builtin_trig, identity_r, unitarity_residual, ybe_residual, Entry, StructuredR,
};
use rllforge::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn trig() -> StructuredR {
    builtin_trig(c(1.0 / PI), c(0.3)).unwrap()
}

fn points() -> Vec<C64> {
    (0..20).map(|k| C64::new(-1.7 + 0.19 * k as f64, 0.3 * ((k % 5) as f64 - 2.0))).collect()
}

// R_{(i1 i2),(j1 j2)} read straight off the matrix
fn entry(m: &CMat, i1: usize, i2: usize, j1: usize, j2: usize) -> C64 {
    m[(2 * i1 + i2, 2 * j1 + j2)]
}

type Tensor3 = [[[[[[C64; 2]; 2]; 2]; 2]; 2]; 2];

fn leg(m: &CMat, legs: (usize, usize)) -> Tensor3 {
    let mut t = [[[[[[c(0.0); 2]; 2]; 2]; 2]; 2]; 2];
    for i in 0..8 {
        for j in 0..8 {
            let a = [i >> 2 & 1, i >> 1 & 1, i & 1];
            let b = [j >> 2 & 1, j >> 1 & 1, j & 1];
            let spare = 3 - legs.0 - legs.1;
            if a[spare] == b[spare] {
                t[a[0]][a[1]][a[2]][b[0]][b[1]][b[2]] = entry(m, a[legs.0], a[legs.1], b[legs.0], b[legs.1]);
            }
        }
    }
    t
}

fn mul(x: &Tensor3, y: &Tensor3) -> Tensor3 {
    let mut t = [[[[[[c(0.0); 2]; 2]; 2]; 2]; 2]; 2];
    for i in 0..8 {
        for j in 0..8 {
            let mut s = c(0.0);
            for k in 0..8 {
                s += x[i >> 2][i >> 1 & 1][i & 1][k >> 2][k >> 1 & 1][k & 1]
                    * y[k >> 2][k >> 1 & 1][k & 1][j >> 2][j >> 1 & 1][j & 1];
            }
            t[i >> 2][i >> 1 & 1][i & 1][j >> 2][j >> 1 & 1][j & 1] = s;
        }
    }
    t
}

fn ybe_by_indices(r: &StructuredR, u: C64, v: C64, w: C64) -> f64 {
    let r12 = leg(&r.eval(u - v).unwrap(), (0, 1));
    let r13 = leg(&r.eval(u - w).unwrap(), (0, 2));
    let r23 = leg(&r.eval(v - w).unwrap(), (1, 2));
    let lhs = mul(&mul(&r12, &r13), &r23);
    let rhs = mul(&mul(&r23, &r13), &r12);
    let mut worst: f64 = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            let idx = |t: &Tensor3| t[i >> 2][i >> 1 & 1][i & 1][j >> 2][j >> 1 & 1][j & 1];
            worst = worst.max((idx(&lhs) - idx(&rhs)).norm());
        }
    }
    worst
}

#[test]
fn index_oracle_agrees_with_ybe_residual() {
    let pts = points();
    for r in [trig(), builtin_rational(c(0.3)).unwrap(), identity_r()] {
        for k in 0..pts.len() - 2 {
            let (u, v, w) = (pts[k], pts[k + 1] * 0.7, pts[k + 2] * -0.4);
            let oracle = ybe_by_indices(&r, u, v, w);
            let res = ybe_residual(&r, u, v, w).unwrap();
            assert!(oracle < 1e-12, "{} oracle {oracle}", r.name());
            assert!(res < 1e-12, "{} residual {res}", r.name());
        }
    }
}

#[test]
fn ybe_residual_detects_a_broken_entry() {
    let broken = trig().with_entry(Entry::S, rllforge::rmatrix::EntryFn::constant(0.5));
    let (u, v, w) = (C64::new(0.4, 0.1), C64::new(-0.3, 0.2), C64::new(0.9, -0.5));
    assert!(ybe_by_indices(&broken, u, v, w) > 1e-3);
    assert!(ybe_residual(&broken, u, v, w).unwrap() > 1e-3);
}

#[test]
fn trig_tends_to_rational_as_eta_vanishes() {
    let small = builtin_trig(c(1e-6), c(0.3)).unwrap();
    let rational = builtin_rational(c(0.3)).unwrap();
    for u in points() {
        let d = small.eval(u).unwrap() - rational.eval(u).unwrap();
        assert!(d.iter().all(|z| z.norm() < 1e-8), "u = {u}");
    }
}

#[test]
fn builtins_are_unitary() {
    for r in [trig(), builtin_rational(c(0.3)).unwrap(), identity_r()] {
        for u in points() {
            assert!(unitarity_residual(&r, u).unwrap() < 1e-13, "{} at {u}", r.name());
        }
    }
}

#[test]
fn r21_swaps_off_diagonal_pairs() {
    let r = trig().with_entry(Entry::C, rllforge::rmatrix::EntryFn::constant(2.0));
    let u = C64::new(0.2, 0.4);
    let (m, m21) = (r.eval(u).unwrap(), r.r21().eval(u).unwrap());
    assert_eq!(m21[(1, 1)], m[(2, 2)]);
    assert_eq!(m21[(2, 2)], m[(1, 1)]);
    assert_eq!(m21[(1, 2)], m[(2, 1)]);
    assert_eq!(m21[(2, 1)], m[(1, 2)]);
    assert_eq!(rllforge::rmatrix::flip_conjugate(&m), m21);
}

#[test]
fn trig_at_zero_is_the_flip() {
    let m = trig().eval(c(0.0)).unwrap();
    let expected = rllforge::linalg::flip2();
    assert!((m - expected).iter().all(|z| z.norm() < 1e-15));
}

#[test]
fn trig_entries_at_large_u() {
    // b(u) → e^{−πηħ} = e^{−0.3}, t(u) = sinh(0.3)/sinh(u + 0.3)
    let r = trig();
    let b = r.entry(Entry::B, c(10.0)).unwrap();
    assert!((b - c((-0.3f64).exp())).norm() < 1e-6);
    let t = r.entry(Entry::T, c(10.0)).unwrap();
    let exact = 2.0 * 0.3f64.sinh() / (10.3f64.exp() - (-10.3f64).exp());
    assert!((t - c(exact)).norm() < 1e-15);
    assert!(t.norm() < 1e-4);
}

#[test]
fn pole_is_guarded() {
    let r = trig();
    assert!(r.entry(Entry::B, c(-0.3)).is_err());
    assert!(r.eval(c(-0.3 + 1e-12)).is_err());
    assert!(builtin_rational(c(0.0)).is_err());
}
