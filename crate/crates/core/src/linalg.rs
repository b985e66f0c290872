//! Small dense helpers shared by the numeric modules.

use nalgebra::DMatrix;

use crate::C64;

pub type CMat = DMatrix<C64>;

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Permutation matrix acting on `C^2 ⊗ C^2 ⊗ C^2` that swaps the second and third factors.
pub fn swap23() -> CMat {
    let mut p = CMat::zeros(8, 8);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                p[(4 * i + 2 * j + k, 4 * i + 2 * k + j)] = C64::new(1.0, 0.0);
            }
        }
    }
    p
}

/// Flip of `C^2 ⊗ C^2`.
pub fn flip2() -> CMat {
    let mut p = CMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            p[(2 * i + j, 2 * j + i)] = C64::new(1.0, 0.0);
        }
    }
    p
}

/// Ratio of largest to smallest singular value; infinite when singular.
pub fn condition_number(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() || !max.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `‖AB − BA‖_max / ‖AB‖_max`, with the denominator floored at the smallest positive double.
pub fn relative_commutator(a: &CMat, b: &CMat) -> f64 {
    let ab = a * b;
    let ba = b * a;
    let num = max_abs(&(&ab - &ba));
    let den = max_abs(&ab);
    if num == 0.0 {
        0.0
    } else {
        num / den.max(f64::MIN_POSITIVE)
    }
}
