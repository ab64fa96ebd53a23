//! Small dense helpers shared by the operator constructors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub(crate) type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// `exp(i * phase)`.
#[inline]
pub(crate) fn cis(phase: f64) -> C64 {
    C64::new(phase.cos(), phase.sin())
}

fn norm_1(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// The scaled matrix has 1-norm at most 1/2, so the series is summed until
/// the next term drops below machine precision relative to the partial sum.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.nrows(), a.ncols(), "expm requires a square matrix");
    let n = a.nrows();
    let norm = norm_1(a);
    let mut squarings = 0u32;
    while norm / (1u64 << squarings) as f64 > 0.5 {
        squarings += 1;
    }
    let scaled = a * C64::new(1.0 / (1u64 << squarings) as f64, 0.0);

    let mut sum = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..64 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if norm_1(&term) <= 1e-18 * norm_1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `max |(U^dagger U - I)_{ij}|`.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &DMatrix::identity(n, n))
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn is_diagonal(m: &DMatrix<C64>, tol: f64) -> bool {
    m.row_iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, z)| i == j || z.norm() <= tol))
}

pub(crate) fn norm_sqr(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn dot(x: &DVector<C64>, y: &DVector<C64>) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = DMatrix::<C64>::zeros(4, 4);
        assert!(max_abs_diff(&expm(&z), &DMatrix::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![
            C64::new(0.3, 1.0),
            C64::new(-2.0, 0.5),
            C64::new(4.0, -7.0),
        ]));
        let e = expm(&d);
        for i in 0..3 {
            let want = d[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(t [[0,-1],[1,0]]) = [[cos t, -sin t],[sin t, cos t]]
        let t = 2.7;
        let g = DMatrix::from_row_slice(2, 2, &[ZERO, C64::new(-t, 0.0), C64::new(t, 0.0), ZERO]);
        let e = expm(&g);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
        assert!(unitarity_defect(&e) < 1e-14);
    }
}
